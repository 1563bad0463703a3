//! Subcommand implementations. Each returns an [`Artifact`]; nothing here
//! touches the filesystem.

use anyhow::{anyhow, bail, Result};
use intertwine::integrator::{
    assemble_coefficients, coefficient_a_b, psi_k, rg_term, CoefficientTable,
};
use intertwine::matlattice::{delta, nu};
use intertwine::residue::{rational_coeffs, residue_report};
use intertwine::supercuspidal::{support_scan, KutzkoDatum};
use intertwine::twisted::{d_eps, s_of, twisted_centralizer_sample};
use intertwine::weights::{w_k_closed, w_k_oracle, w_k_total, QuadCharTable, TorusSpec, WeightQuery};
use intertwine::{GroupForm, LatticeSpec, LocalFieldCtx, Mat, TorusElem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{parse_matrix, Regime, RunConfig};
use crate::output::{coord_cells, coord_columns, Artifact, Table};

pub const NORMALIZATIONS: &str =
    "vol(GL_2(O)) = 1; vol(O^x) = 1 on T through alpha; one unit per (i, b mod O) on G/T; vol(A ∩ K) = 1";
pub const LAMBDA_1: &str = "x -> zeta_p^(first digit of x)";

pub fn meta(cfg: &RunConfig, command: &str) -> Value {
    let t = cfg.pipeline.truncation();
    json!({
        "command": command,
        "field": {
            "p": cfg.field.p,
            "e": cfg.field.e,
            "eisenstein": cfg.field.eisenstein,
            "precision": cfg.field.precision,
        },
        "truncation": {
            "depth": t.m,
            "b_window": t.b_window,
            "e_max": t.e_max,
            "v_max": t.v_max,
            "k_max": t.k_max,
        },
        "normalizations": NORMALIZATIONS,
        "lambda_1": LAMBDA_1,
        "seed": cfg.seed,
    })
}

fn alphas(cfg: &RunConfig, ctx: &LocalFieldCtx) -> Result<Vec<(String, TorusElem)>> {
    if cfg.query.alpha.is_empty() {
        bail!("query.alpha: at least one value is needed");
    }
    cfg.query
        .alpha
        .iter()
        .map(|s| {
            let a = ctx.parse(s).map_err(|e| anyhow!("query.alpha: {s:?}: {e}"))?;
            Ok((s.clone(), TorusElem::new(ctx, a)?))
        })
        .collect()
}

fn datum(ctx: &LocalFieldCtx) -> Result<KutzkoDatum> {
    Ok(KutzkoDatum::new(ctx)?)
}

pub fn wfactor(cfg: &RunConfig) -> Result<Artifact> {
    let ctx = cfg.field.context()?;
    let q = &cfg.query;
    let g = match &q.g {
        Some(s) => parse_matrix(&ctx, s)?,
        None => Mat::identity(&ctx, q.n),
    };
    let n = g.n();
    let h = match &q.h {
        Some(s) => parse_matrix(&ctx, s)?,
        None => Mat::identity(&ctx, n),
    };
    if h.n() != n {
        bail!("query.h: size {} does not match g", h.n());
    }
    let h_is_one = h.eq(&ctx, &Mat::identity(&ctx, n));
    let cls = ctx.square_class_reps()?;
    let om = QuadCharTable::trivial(&cls);
    let mut t = Table::new(&["k", "n", "r", "delta", "closed", "oracle", "W_k"], meta(cfg, "wfactor"));
    let deltas: Vec<String> = (1..=n / 2)
        .map(|i| delta(&ctx, &g, i).map(|d| d.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    for &k in &q.k {
        let mut wq = WeightQuery::new(g.clone(), h.clone(), k, TorusSpec::split(q.rank));
        wq.lattice = LatticeSpec { i: q.lattice_i };
        let closed = if h_is_one {
            w_k_closed(&ctx, &wq)?.to_string()
        } else {
            String::new()
        };
        let oracle = w_k_oracle(&ctx, &wq)?.to_string();
        let big_w = if n == 2 && q.lattice_i == 0 {
            w_k_total(&ctx, &g, &h, &om, &cls, k)?.to_string()
        } else {
            String::new()
        };
        t.push(vec![
            k.to_string(),
            n.to_string(),
            q.rank.to_string(),
            deltas.join(" "),
            closed,
            oracle,
            big_w,
        ]);
    }
    Ok(Artifact::Table(t))
}

pub fn dtwist(cfg: &RunConfig) -> Result<Artifact> {
    let ctx = cfg.field.context()?;
    let form = GroupForm::split_orthogonal(&ctx, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(
        &[
            "alpha",
            "ord_alpha_minus_1",
            "regular",
            "kernel_dim",
            "d_eps_exponent",
            "nu_is_minus_gamma",
            "centralizer_solutions",
            "centralizer_non_torus",
        ],
        meta(cfg, "dtwist"),
    );
    for (label, g) in alphas(cfg, &ctx)? {
        let depth = g.depth(&ctx)?.to_string();
        let s = s_of(&ctx, &g, &form)?;
        let nu_ok = nu(&ctx, &s, &form)?.eq(&ctx, &g.matrix(&ctx)?.neg(&ctx));
        let si = s.inv(&ctx)?;
        let (regular, kdim, exp) = match d_eps(&ctx, &si, &form) {
            Ok(r) => (true, r.kernel_dim.to_string(), r.value_exponent.to_string()),
            Err(intertwine::Error::NotRegular(k)) => (false, k.to_string(), String::new()),
            Err(e) => return Err(e.into()),
        };
        let (sol, bad) = if cfg.query.trials > 0 && si.is_integral(&ctx)? {
            let rep = twisted_centralizer_sample(&ctx, &g, cfg.pipeline.depth, cfg.query.trials, &mut rng)?;
            (rep.solutions.to_string(), rep.non_torus.to_string())
        } else {
            (String::new(), String::new())
        };
        t.push(vec![label, depth, regular.to_string(), kdim, exp, nu_ok.to_string(), sol, bad]);
    }
    Ok(Artifact::Table(t))
}

pub fn support(cfg: &RunConfig) -> Result<Artifact> {
    let ctx = cfg.field.context()?;
    let d = datum(&ctx)?;
    let mut t = Table::new(
        &[
            "alpha",
            "regime",
            "depth",
            "effective_depth",
            "strata_searched",
            "witness_kappa",
            "witness_b",
            "witness_level",
            "witness_value_exp",
        ],
        meta(cfg, "support-scan"),
    );
    for (label, g) in alphas(cfg, &ctx)? {
        let r = support_scan(&d, &g, cfg.pipeline.depth, cfg.pipeline.b_window)?;
        let regime = serde_json::to_value(r.regime)?
            .as_str()
            .unwrap_or_default()
            .to_string();
        let (kap, b, lvl, val) = match &r.witness {
            Some(w) => (
                w.kappa.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                w.b.clone(),
                w.level.to_string(),
                w.value_exp.to_string(),
            ),
            None => ("none".into(), String::new(), String::new(), String::new()),
        };
        t.push(vec![
            label,
            regime,
            r.depth.to_string(),
            r.effective_depth.to_string(),
            r.strata_searched.to_string(),
            kap,
            b,
            lvl,
            val,
        ]);
    }
    Ok(Artifact::Table(t))
}

pub fn psik(cfg: &RunConfig) -> Result<Artifact> {
    let ctx = cfg.field.context()?;
    let d = datum(&ctx)?;
    let tr = cfg.pipeline.truncation();
    let mut cols = vec!["alpha".to_string(), "k".to_string()];
    cols.extend(coord_columns(ctx.p(), "psi"));
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs, meta(cfg, "psik"));
    for (label, g) in alphas(cfg, &ctx)? {
        for &k in &cfg.query.k {
            let v = psi_k(&d, &g, k, &tr)?;
            let mut row = vec![label.clone(), k.to_string()];
            row.extend(coord_cells(&v.value));
            t.push(row);
        }
    }
    Ok(Artifact::Table(t))
}

fn coefficient_table(cfg: &RunConfig) -> Result<CoefficientTable> {
    let ctx = cfg.field.context()?;
    let f = datum(&ctx)?.residue_fn()?;
    Ok(assemble_coefficients(&ctx, &f, &cfg.pipeline.truncation())?)
}

fn coeff_rows(table: &CoefficientTable, m: Value) -> Table {
    let mut cols = vec!["k".to_string()];
    cols.extend(coord_columns(table.p, "c"));
    cols.push("q_half_power".into());
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs, m);
    for (k, c) in table.coeffs.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(coord_cells(&c.value));
        row.push(c.half_q_exp.to_string());
        t.push(row);
    }
    t
}

pub fn coeffs(cfg: &RunConfig) -> Result<Artifact> {
    let table = coefficient_table(cfg)?;
    let mut m = meta(cfg, "coeffs");
    m["regime"] = json!(table.regime());
    Ok(Artifact::Table(coeff_rows(&table, m)))
}

pub fn rg(cfg: &RunConfig) -> Result<Artifact> {
    let ctx = cfg.field.context()?;
    let d = datum(&ctx)?;
    let tr = cfg.pipeline.truncation();
    let mut t = Table::new(&["quantity", "e", "value"], meta(cfg, "rg-term"));
    match cfg.pipeline.regime {
        Regime::Odd => {
            let v = rg_term(&ctx, &d.residue_fn()?, &tr)?;
            t.push(vec!["R_G".into(), String::new(), v.value.to_string()]);
        }
        Regime::Even => {
            let ab = coefficient_a_b(&d, &tr)?;
            for (name, v) in [
                ("A", &ab.a),
                ("B", &ab.b),
                ("A_formula", &ab.a_formula),
                ("B_formula", &ab.b_formula),
            ] {
                t.push(vec![name.into(), String::new(), v.to_string()]);
            }
            for inc in &ab.increments {
                for (name, v) in [
                    ("A", &inc.a),
                    ("B", &inc.b),
                    ("A_formula", &inc.a_formula),
                    ("B_formula", &inc.b_formula),
                ] {
                    t.push(vec![name.into(), inc.e.to_string(), v.to_string()]);
                }
            }
        }
    }
    Ok(Artifact::Table(t))
}

pub fn residue(cfg: &RunConfig) -> Result<Artifact> {
    let table = coefficient_table(cfg)?;
    let regime = match cfg.pipeline.regime {
        Regime::Odd => "odd-factorized",
        Regime::Even => "even-affine",
    };
    let values: Vec<_> = table.coeffs.iter().map(|c| c.value.clone()).collect();
    let c = rational_coeffs(&values)?;
    let q = cfg.field.context()?.q();
    let report = residue_report(&c, cfg.pipeline.n, q, cfg.pipeline.max_degree, regime)?;
    let mut doc = serde_json::to_value(&report)?;
    doc["meta"] = meta(cfg, "residue");
    doc["coefficients"] = json!(c.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    let mut t = Table::new(&["order", "rational", "lnq_power"], doc["meta"].clone());
    for term in &report.laurent {
        t.push(vec![
            term.order.to_string(),
            term.rational.to_string(),
            term.lnq_power.to_string(),
        ]);
    }
    Ok(Artifact::Report { json: doc, table: t })
}
