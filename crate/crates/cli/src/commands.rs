use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use xxz_ness::closedform::predictions;
use xxz_ness::oracle::{oracle_density, N_MAX_ORACLE};
use xxz_ness::verify::{
    check_boundary_relations, check_bulk_algebra, check_commutation_identity, check_isotropic_identities,
    AlgebraReport, N_MAX_COMMUTATION,
};
use xxz_ness::{
    build_cholesky, build_density, build_mpo, build_transfer, make_anisotropy, table_for, truncation_dim, AmplitudeTable64,
    AnisotropySpec64, Balancing, ChainContraction, GaugeChoice, GaugeChoice64, Regime, TauPolicy, TransferSet64, C64,
};

use crate::output::{Cell, Report, Table};
use crate::{Common, Failure, Point, TauArg};

/// Oracle comparison runs up to this chain length.
pub const N_MAX_VERIFY_ORACLE: usize = 5;

/// Tolerance on `max |ρ - ρ_oracle|`.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

pub const THREADS_ENV: &str = "NESS_XXZ_THREADS";

type Outcome = Result<(Report, Value, bool), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn validate(delta: f64, eps: f64, n: usize) -> Result<(), Failure> {
    if !(delta.is_finite() && delta > -1.0) {
        return Err(usage(format!("--delta must be a finite number above -1, got {delta}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(usage(format!("--eps must be positive and finite, got {eps}")));
    }
    if n < 2 {
        return Err(usage(format!("--n must be at least 2, got {n}")));
    }
    Ok(())
}

fn parse_gauge(common: &Common) -> Result<GaugeChoice64, Failure> {
    let c = match &common.gauge_c {
        None => C64::new(1.0, 0.0),
        Some(s) => {
            let parts: Vec<&str> = s.split(',').map(str::trim).collect();
            let num = |p: &str| p.parse::<f64>().map_err(|_| usage(format!("--gauge-c: cannot parse {p:?}")));
            match parts.as_slice() {
                [re] => C64::new(num(re)?, 0.0),
                [re, im] => C64::new(num(re)?, num(im)?),
                _ => return Err(usage("--gauge-c expects `re` or `re,im`")),
            }
        }
    };
    if !(c.re.is_finite() && c.im.is_finite()) || c == C64::new(0.0, 0.0) {
        return Err(usage("--gauge-c must be finite and nonzero"));
    }
    let tau = match common.tau_policy {
        TauArg::Default => TauPolicy::SignByCosine,
        TauArg::AllPlus => TauPolicy::AllPlus,
    };
    Ok(GaugeChoice::new(c, tau))
}

fn balancing(common: &Common) -> Balancing {
    if common.no_balance {
        Balancing::Off
    } else {
        Balancing::On
    }
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct GaugeMeta {
    c: Complex,
    tau_policy: &'static str,
}

#[derive(Serialize)]
struct Meta {
    delta: f64,
    lambda: Complex,
    regime: Regime,
    eps: f64,
    n: usize,
    d: usize,
    gauge: GaugeMeta,
    balancing: bool,
    version: &'static str,
}

/// One parameter point with its amplitude table at `d = 1 + ⌊n/2⌋`.
struct Setup {
    delta: f64,
    eps: f64,
    n: usize,
    spec: AnisotropySpec64,
    gauge: GaugeChoice64,
    balancing: Balancing,
    table: AmplitudeTable64,
}

impl Setup {
    fn new(delta: f64, eps: f64, n: usize, common: &Common) -> Result<Self, Failure> {
        validate(delta, eps, n)?;
        let spec = make_anisotropy(delta)?;
        let gauge = parse_gauge(common)?;
        let table = table_for(&spec, eps, truncation_dim(n), &gauge)?;
        Ok(Setup { delta, eps, n, spec, gauge, balancing: balancing(common), table })
    }

    fn from_point(p: &Point, common: &Common) -> Result<Self, Failure> {
        Setup::new(p.delta, p.eps, p.n, common)
    }

    fn table_of_dim(&self, d: usize) -> Result<AmplitudeTable64, Failure> {
        Ok(table_for(&self.spec, self.eps, d, &self.gauge)?)
    }

    fn transfer(&self) -> Result<TransferSet64, Failure> {
        Ok(build_transfer(&self.table, self.balancing)?)
    }

    fn meta(&self) -> Meta {
        let isotropic = self.spec.regime() == Regime::Isotropic;
        Meta {
            delta: self.delta,
            lambda: self.spec.lambda().into(),
            regime: self.spec.regime(),
            eps: self.eps,
            n: self.n,
            d: self.table.d,
            gauge: GaugeMeta {
                c: self.table.gauge.c.into(),
                tau_policy: match (&self.gauge.tau, isotropic) {
                    (_, true) => "isotropic-fixed",
                    (TauPolicy::AllPlus, false) => "all-plus",
                    _ => "default",
                },
            },
            balancing: self.balancing == Balancing::On,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn meta_json(&self) -> Value {
        serde_json::to_value(self.meta()).expect("meta serializes")
    }
}

pub fn profile(point: &Point, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    let ts = s.transfer()?;
    let c = ChainContraction::new(&ts, s.n)?;
    let mut t = Table::new(&["j", "sz"]);
    for (j, sz) in c.profile()?.into_iter().enumerate() {
        t.push(vec![(j + 1).into(), sz.into()]);
    }
    Ok((Report::table(t), s.meta_json(), true))
}

pub fn current(point: &Point, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    let ts = s.transfer()?;
    let j = ChainContraction::new(&ts, s.n)?.current()?;
    let mut t = Table::new(&["n", "delta", "eps", "current"]);
    t.push(vec![s.n.into(), s.delta.into(), s.eps.into(), j.into()]);
    Ok((Report::table(t), s.meta_json(), true))
}

pub fn correlate(point: &Point, sites: Option<&[usize]>, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    let ts = s.transfer()?;
    let c = ChainContraction::new(&ts, s.n)?;
    let profile = c.profile()?;
    let pairs = match sites {
        None => c.zz_all()?,
        Some(&[a, b]) => {
            let (j, k) = (a.min(b), a.max(b));
            vec![(j, k, c.zz(j, k)?)]
        }
        Some(_) => return Err(usage("--sites expects exactly two indices j,k")),
    };
    let mut t = Table::new(&["j", "k", "zz", "connected"]);
    for (j, k, zz) in pairs {
        t.push(vec![j.into(), k.into(), zz.into(), (zz - profile[j - 1] * profile[k - 1]).into()]);
    }
    Ok((Report::table(t), s.meta_json(), true))
}

pub fn density(point: &Point, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    let rho = build_density(&build_cholesky(&build_mpo(&s.table), s.n)?);
    let dim = rho.dim();
    let mut t = Table::new(&["row", "col", "re", "im"]);
    let mut re = Vec::with_capacity(dim);
    let mut im = Vec::with_capacity(dim);
    for r in 0..dim {
        let row = rho.rho.row(r);
        for (c, z) in row.iter().enumerate() {
            t.push(vec![r.into(), c.into(), z.re.into(), z.im.into()]);
        }
        re.push(row.iter().map(|z| z.re).collect::<Vec<_>>());
        im.push(row.iter().map(|z| z.im).collect::<Vec<_>>());
    }
    let json = json!({
        "dim": dim,
        "basis": "row-major; index = sum_j nu_j 2^(n-j), site 1 most significant, nu = 0 is spin up",
        "trace_unnormalized": rho.trace_r,
        "re": re,
        "im": im,
    });
    Ok((Report { table: t, json: Some(json) }, s.meta_json(), true))
}

fn report_row(t: &mut Table, r: &AlgebraReport) {
    let id = serde_json::to_value(r.relation_id).expect("relation id serializes");
    t.push(vec![
        id.as_str().unwrap_or_default().into(),
        r.residual.into(),
        r.scale.into(),
        r.relative().into(),
        r.protected_dim.into(),
        r.passed().into(),
    ]);
}

pub fn verify(point: &Point, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    // protected block covers every auxiliary index a length-n chain uses
    let d = (s.table.d + 3).max(6);
    let wide = s.table_of_dim(d)?;
    let mpo = build_mpo(&wide);
    let mut reports = check_bulk_algebra(&mpo)?;
    reports.extend(check_boundary_relations(&mpo)?);
    if s.n <= N_MAX_COMMUTATION {
        reports.push(check_commutation_identity(&mpo, s.n)?);
    }
    if s.spec.regime() == Regime::Isotropic {
        reports.extend(check_isotropic_identities(&build_transfer(&wide, Balancing::Off)?)?);
    }
    let mut passed = reports.iter().all(AlgebraReport::passed);

    let mut t = Table::new(&["relation", "residual", "scale", "relative", "protected_dim", "passed"]);
    reports.iter().for_each(|r| report_row(&mut t, r));

    let oracle = if s.n <= N_MAX_VERIFY_ORACLE.min(N_MAX_ORACLE) {
        let analytic = build_density(&build_cholesky(&build_mpo(&s.table), s.n)?);
        let sol = oracle_density(s.n, s.delta, s.eps)?;
        let dev = analytic.rho.max_abs_diff(&sol.density.rho);
        let ok = dev <= ORACLE_TOLERANCE;
        passed &= ok;
        t.push(vec![
            "oracle-density".into(),
            dev.into(),
            1.0.into(),
            dev.into(),
            analytic.dim().into(),
            ok.into(),
        ]);
        json!({
            "n": s.n,
            "method": format!("{:?}", sol.method),
            "max_deviation": dev,
            "tolerance": ORACLE_TOLERANCE,
            "gap": sol.gap,
            "warning": sol.warning,
            "passed": ok,
        })
    } else {
        Value::Null
    };
    let json_reports: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "relation": r.relation_id,
                "residual": r.residual,
                "scale": r.scale,
                "relative": r.relative(),
                "protected_dim": r.protected_dim,
                "passed": r.passed(),
            })
        })
        .collect();
    let json = json!({ "check_dim": d, "reports": json_reports, "oracle": oracle, "passed": passed });
    Ok((Report { table: t, json: Some(json) }, s.meta_json(), passed))
}

pub fn predict(point: &Point, common: &Common) -> Outcome {
    let s = Setup::from_point(point, common)?;
    let preds = predictions(s.delta, s.eps, s.n);
    let mut t = Table::new(&["name", "value", "validity", "warning"]);
    for p in &preds {
        let w = p.warning.as_ref().map(|w| w.message.clone()).unwrap_or_default();
        t.push(vec![p.name.clone().into(), p.value.into(), p.validity.clone().into(), w.into()]);
    }
    let json = serde_json::to_value(&preds).expect("predictions serialize");
    Ok((Report { table: t, json: Some(json) }, s.meta_json(), true))
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

pub fn sweep(deltas: &[f64], epss: &[f64], ns: &[usize], common: &Common) -> Outcome {
    let points: Vec<(f64, f64, usize)> = deltas
        .iter()
        .flat_map(|&d| epss.iter().flat_map(move |&e| ns.iter().map(move |&n| (d, e, n))))
        .collect();
    let setups = points.iter().map(|&(d, e, n)| Setup::new(d, e, n, common)).collect::<Result<Vec<_>, _>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_count()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Failure::Io(e.into()))?;
    let rows: Vec<Result<Vec<Cell>, Failure>> = pool.install(|| {
        setups
            .par_iter()
            .map(|s| {
                let ts = s.transfer()?;
                let c = ChainContraction::new(&ts, s.n)?;
                Ok(vec![
                    s.delta.into(),
                    s.eps.into(),
                    s.n.into(),
                    s.table.d.into(),
                    c.current()?.into(),
                    c.sz(1)?.into(),
                    c.log_norm().into(),
                ])
            })
            .collect()
    });
    let mut t = Table::new(&["delta", "eps", "n", "d", "current", "sz_first", "log_norm"]);
    for r in rows {
        t.push(r?);
    }
    let meta = json!({
        "delta": deltas,
        "lambda": setups.iter().map(|s| Complex::from(s.spec.lambda())).collect::<Vec<_>>(),
        "eps": epss,
        "n": ns,
        "d": setups.iter().map(|s| s.table.d).collect::<Vec<_>>(),
        "gauge": setups.first().map(|s| s.meta().gauge),
        "balancing": !common.no_balance,
        "points": setups.len(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    Ok((Report::table(t), meta, true))
}
