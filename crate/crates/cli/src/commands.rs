use anyhow::Context;
use kinex::birkhoff::{
    all_checks, separation_certificate, GridSpec, PropCheckResult, Sample, Verdict,
};
use kinex::flow::{expansiveness_probe, ProbeSpec};
use kinex::return_time::{build_T, build_Tn, chi, PLJson, TnSpec};
use kinex::tower::{convergents, interval_in, tower_partition, TowerJson};
use kinex::{QuadElem, RotationParams};
use num_rational::BigRational;
use serde::Serialize;

use crate::config::Resolved;
use crate::output::{decimal, exact, Artifact};

/// What a command produced and whether every check in it passed.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub ok: bool,
}

#[derive(Serialize)]
struct Doc<'a, T: Serialize> {
    command: &'a str,
    config: &'a Resolved,
    ok: bool,
    #[serde(flatten)]
    body: T,
}

fn params(cfg: &Resolved) -> anyhow::Result<RotationParams> {
    Ok(RotationParams::new(cfg.a)?)
}

#[derive(Serialize)]
struct ConvergentRow {
    a: u64,
    seed: u64,
    n: usize,
    p: String,
    q: String,
    offset: String,
    offset_decimal: String,
    /// `q_{n+1}·p_n − q_n·p_{n+1}`; empty on the last row.
    determinant: String,
}

pub fn convergents_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    let conv = convergents(&p, cfg.big_n + 1);
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 0..=cfg.big_n {
        let c = &conv[n];
        let next = &conv[n + 1];
        let det = &next.q * &c.p - &c.q * &next.p;
        ok &= det == 1.into() || det == (-1).into();
        let off = c.offset(&p);
        rows.push(ConvergentRow {
            a: cfg.a,
            seed: cfg.seed,
            n,
            p: c.p.to_string(),
            q: c.q.to_string(),
            offset: exact(&off),
            offset_decimal: decimal(&off),
            determinant: if n < cfg.big_n {
                det.to_string()
            } else {
                String::new()
            },
        });
    }
    let doc = Doc {
        command: "convergents",
        config: cfg,
        ok,
        body: serde_json::json!({ "rows": &rows }),
    };
    Ok(Outcome {
        artifacts: vec![Artifact::pick(cfg.format, "convergents", &doc, &rows)?],
        ok,
    })
}

#[derive(Serialize)]
struct FloorRow {
    a: u64,
    seed: u64,
    level: usize,
    column: String,
    iterate: u64,
    left: String,
    right: String,
    length: String,
    length_decimal: String,
}

#[derive(Serialize)]
struct TowerEntry {
    verified: bool,
    #[serde(flatten)]
    tower: TowerJson,
}

pub fn tower_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    let mut towers = Vec::new();
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let t = tower_partition(&p, n)?;
        let json = t.to_json();
        for f in &json.floors {
            rows.push(FloorRow {
                a: cfg.a,
                seed: cfg.seed,
                level: n,
                column: format!("{:?}", f.column).to_lowercase(),
                iterate: f.iterate,
                left: exact(&f.left),
                right: exact(&f.right),
                length: exact(&f.length),
                length_decimal: decimal(&f.length),
            });
        }
        towers.push(TowerEntry {
            verified: t.verify(),
            tower: json,
        });
    }
    let ok = towers.iter().all(|t| t.verified);
    let doc = Doc {
        command: "tower",
        config: cfg,
        ok,
        body: serde_json::json!({ "towers": &towers }),
    };
    Ok(Outcome {
        artifacts: vec![Artifact::pick(cfg.format, "tower", &doc, &rows)?],
        ok,
    })
}

#[derive(Serialize)]
struct LayerEntry {
    n: usize,
    spec: TnSpec,
    positive_bumps: String,
    negative_half_bumps: String,
    breakpoints: usize,
    sup_norm: QuadElem,
    interval_length: QuadElem,
    sup_within_interval: bool,
    indicator: PLJson,
    function: PLJson,
}

#[derive(Serialize)]
struct LayerRow {
    a: u64,
    seed: u64,
    n: usize,
    j: String,
    j_prime: String,
    breakpoints: usize,
    sup_norm: String,
    sup_norm_decimal: String,
    interval_length: String,
    interval_length_decimal: String,
    sup_within_interval: bool,
}

#[derive(Serialize)]
struct SampleRow {
    a: u64,
    seed: u64,
    x: String,
    x_decimal: String,
    total: String,
    total_decimal: String,
}

pub fn build_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    let mut layers = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let (spec, f) = build_Tn(&p, n)?;
        let interval = interval_in(&p, n).0;
        let len = interval.length().clone();
        let sup = f.sup_norm();
        layers.push(LayerEntry {
            n,
            positive_bumps: spec.j.to_string(),
            negative_half_bumps: (&spec.j * 2u32).to_string(),
            breakpoints: f.len(),
            sup_within_interval: sup <= len,
            sup_norm: sup,
            interval_length: len,
            indicator: chi(&interval)?.to_json(),
            function: f.to_json(),
            spec,
        });
    }
    let (total, tail) = build_T(&p, cfg.big_n).context("building T_{≤N}; lower N")?;
    let resolution = u32::try_from(cfg.samples.unwrap_or(256)).context("samples")?;
    let samples: Vec<SampleRow> = total
        .sample(resolution.max(1))
        .into_iter()
        .map(|(x, v)| SampleRow {
            a: cfg.a,
            seed: cfg.seed,
            x: exact(x.value()),
            x_decimal: decimal(x.value()),
            total: exact(&v),
            total_decimal: decimal(&v),
        })
        .collect();
    let ok = layers.iter().all(|l| l.sup_within_interval);
    let rows: Vec<LayerRow> = layers
        .iter()
        .map(|l| LayerRow {
            a: cfg.a,
            seed: cfg.seed,
            n: l.n,
            j: l.spec.j.to_string(),
            j_prime: l.spec.j_prime.to_string(),
            breakpoints: l.breakpoints,
            sup_norm: exact(&l.sup_norm),
            sup_norm_decimal: decimal(&l.sup_norm),
            interval_length: exact(&l.interval_length),
            interval_length_decimal: decimal(&l.interval_length),
            sup_within_interval: l.sup_within_interval,
        })
        .collect();
    let doc = Doc {
        command: "build",
        config: cfg,
        ok,
        body: serde_json::json!({
            "layers": &layers,
            "total": {
                "N": cfg.big_n,
                "tail_bound": &tail,
                "lipschitz": total.lipschitz().to_string(),
                "function": total.to_json(),
            },
        }),
    };
    let main = Artifact::pick(cfg.format, "build", &doc, &rows)?;
    Ok(Outcome {
        artifacts: vec![main, Artifact::csv("build_samples", &samples)?],
        ok,
    })
}

#[derive(Serialize)]
struct CheckRow {
    a: u64,
    seed: u64,
    n: usize,
    sample: String,
    prop: String,
    verdict: String,
    evaluator: String,
    i: String,
    big_n: usize,
    lhs: String,
    lhs_decimal: String,
    rhs: String,
    rhs_decimal: String,
    margin: String,
    margin_decimal: String,
}

fn check_row(cfg: &Resolved, r: &PropCheckResult) -> CheckRow {
    CheckRow {
        a: r.a,
        seed: cfg.seed,
        n: r.n,
        sample: r.sample.clone(),
        prop: r.id.to_string(),
        verdict: r.verdict.to_string(),
        evaluator: format!("{:?}", r.evaluator).to_lowercase(),
        i: r.i.to_string(),
        big_n: r.big_n,
        lhs: exact(&r.lhs),
        lhs_decimal: decimal(&r.lhs),
        rhs: exact(&r.rhs),
        rhs_decimal: decimal(&r.rhs),
        margin: exact(&r.margin),
        margin_decimal: decimal(&r.margin),
    }
}

pub fn verify_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    if cfg.n_min == 0 {
        anyhow::bail!("verify needs n-min ≥ 1");
    }
    let mut samples = vec![Sample::Midpoint, Sample::OuterEnd, Sample::InnerEnd];
    samples.extend((0..cfg.samples.unwrap_or(0) as u64).map(|k| Sample::Random(cfg.seed + k)));
    let mut results = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        for &s in &samples {
            results.extend(all_checks(&p, n, s, cfg.naive_cap)?);
        }
    }
    let ok = results.iter().all(|r| r.verdict != Verdict::Fail);
    let rows: Vec<CheckRow> = results.iter().map(|r| check_row(cfg, r)).collect();
    let doc = Doc {
        command: "verify",
        config: cfg,
        ok,
        body: serde_json::json!({ "results": &results }),
    };
    Ok(Outcome {
        artifacts: vec![Artifact::pick(cfg.format, "verify", &doc, &rows)?],
        ok,
    })
}

#[derive(Serialize)]
struct PairRow {
    a: u64,
    seed: u64,
    id: usize,
    n: usize,
    x: String,
    r: String,
    r_decimal: String,
    q: String,
    separation: String,
    separation_decimal: String,
    separated: bool,
}

fn levels(cfg: &Resolved) -> anyhow::Result<Vec<usize>> {
    if cfg.n_min == 0 {
        anyhow::bail!("scale windows start at n = 1");
    }
    Ok((cfg.n_min..=cfg.n_max).collect())
}

pub fn scan_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    let grid = GridSpec {
        levels: levels(cfg)?,
        pairs_per_level: cfg.samples.unwrap_or(50).max(1),
        seed: cfg.seed,
        search_depth: cfg.search_depth,
    };
    let cert = separation_certificate(&p, &grid)?;
    let rows: Vec<PairRow> = cert
        .pairs
        .iter()
        .map(|o| PairRow {
            a: cfg.a,
            seed: cfg.seed,
            id: o.id,
            n: o.n,
            x: exact(&o.x),
            r: exact(&o.r),
            r_decimal: decimal(&o.r),
            q: o.q.as_ref().map(|q| q.to_string()).unwrap_or_default(),
            separation: o.separation.as_ref().map(exact).unwrap_or_default(),
            separation_decimal: o.separation.as_ref().map(decimal).unwrap_or_default(),
            separated: o.separated,
        })
        .collect();
    let doc = Doc {
        command: "scan",
        config: cfg,
        ok: cert.holds,
        body: &cert,
    };
    Ok(Outcome {
        artifacts: vec![Artifact::pick(cfg.format, "scan", &doc, &rows)?],
        ok: cert.holds,
    })
}

#[derive(Serialize)]
struct ProbeRow {
    a: u64,
    seed: u64,
    id: usize,
    n: usize,
    k: String,
    time: String,
    time_decimal: String,
    distance: String,
    distance_decimal: String,
    separated: bool,
}

pub fn probe_cmd(cfg: &Resolved) -> anyhow::Result<Outcome> {
    let p = params(cfg)?;
    let epsilon: BigRational = cfg
        .epsilon
        .parse()
        .map_err(|e| anyhow::anyhow!("epsilon {:?}: {e}", cfg.epsilon))?;
    let spec = ProbeSpec {
        samples: cfg.samples.unwrap_or(1000).max(1),
        levels: levels(cfg)?,
        same_orbit: 20,
        seed: cfg.seed,
        search_depth: cfg.search_depth,
    };
    let res = expansiveness_probe(&p, cfg.big_n, &epsilon, &spec)?;
    let ok = res.all_separated() && res.same_orbit_within_shift == res.same_orbit_count;
    let rows: Vec<ProbeRow> = res
        .pairs
        .iter()
        .map(|q| ProbeRow {
            a: cfg.a,
            seed: cfg.seed,
            id: q.id,
            n: q.n,
            k: q.k.to_string(),
            time: exact(&q.time),
            time_decimal: decimal(&q.time),
            distance: exact(&q.distance),
            distance_decimal: decimal(&q.distance),
            separated: q.separated,
        })
        .collect();
    let doc = Doc {
        command: "probe",
        config: cfg,
        ok,
        body: &res,
    };
    Ok(Outcome {
        artifacts: vec![Artifact::pick(cfg.format, "probe", &doc, &rows)?],
        ok,
    })
}
