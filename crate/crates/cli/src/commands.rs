use std::fs;
use std::io::BufWriter;

use hdx_core::algebra::is_primitive;
use hdx_core::complex::{
    build_complex, link_graph, load_instance, save_instance, sl3_order, spectral_report, walk_identities,
    walk_matrices, ComplexInstance, SpectralReportOptions, DEFAULT_DENSE_EDGE_LIMIT,
};
use hdx_core::embedding::{rm_restrict, upper_slots, MultiPoly};
use hdx_core::global_code::{
    assemble_code, corrupt, local_correction, min_weight_probe, multiply, translate, vertex_tester,
    views_from_word, CorrectionOutcome, GlobalCode, DEFAULT_WEIGHT_ENUM_BUDGET,
};
use hdx_core::local_code::{binomial_matrix_rank, build_local_code, local_dim_formula};
use hdx_core::local_decoder::{
    agreement_decode, Corruption, DecodeRecord, DecodeStatus, LineEnsemble, LocalCodeCache, SkewEnsemble,
};
use hdx_core::report::{CheckStatus, Report};
use hdx_core::{HdxError, Result};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;

/// Entrywise tolerance for the walk identities.
const WALK_TOL: f64 = 1e-12;
/// Random subsets per link graph in the mixing check.
const MIXING_SUBSETS: usize = 200;
/// Random edge vectors in the up-down comparison.
const UPDOWN_VECTORS: usize = 100;
/// Rows checked when the walks are too large to materialize.
const SAMPLED_WALK_ROWS: usize = 10_000;
/// Random combinations tried by the minimum-weight probe.
const WEIGHT_SAMPLES: usize = 200;

fn instance(cfg: &RunConfig) -> Result<ComplexInstance> {
    if cfg.input.len() > 1 {
        return Err(HdxError::Parameter("--in takes one instance file here".into()));
    }
    match cfg.instance_path() {
        Some(path) => {
            let x = load_instance(path)?;
            cfg.check_q(x.q())?;
            Ok(x)
        }
        None => build_complex(cfg.q, cfg.n, cfg.phi.as_deref(), cfg.budget_group),
    }
}

fn instance_json(x: &ComplexInstance) -> serde_json::Value {
    json!({
        "q": x.q(),
        "n": x.n(),
        "phi": x.phi(),
        "vertices": x.num_vertices(),
        "edges": x.num_edges(),
        "triangles": x.num_triangles(),
    })
}

/// Generator basis of the code; an over-budget dimension is a budget error.
fn exact_dimension(code: &mut GlobalCode, budget: usize) -> Result<()> {
    let d = code.dimension(budget)?;
    if !d.exact {
        return Err(HdxError::Budget {
            what: "exact elimination of the global code".into(),
            needed: d.triangles as u128,
            limit: budget as u128,
        });
    }
    Ok(())
}

fn random_rm_word(x: &ComplexInstance, rng: &mut ChaCha8Rng) -> Result<Vec<u32>> {
    let q = x.q();
    let nvars = 9 * x.n();
    let vars: Vec<usize> = (0..nvars).collect();
    let coeffs: Vec<u32> = (0..nvars).map(|_| rng.random_range(0..q)).collect();
    rm_restrict(
        &MultiPoly::affine(nvars, rng.random_range(0..q), &vars, &coeffs),
        x,
    )
}

pub fn build(cfg: &RunConfig) -> Result<Report> {
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| HdxError::Parameter("build needs --out".into()))?;
    let x = build_complex(cfg.q, cfg.n, cfg.phi.as_deref(), cfg.budget_group)?;
    let header = save_instance(&x, out)?;
    let mut r = Report::new("build", cfg.echo());
    let want = sl3_order(x.q(), x.n());
    let status = if is_primitive(x.q(), x.phi())? {
        CheckStatus::from_bool(header.group_order as u128 == want)
    } else {
        CheckStatus::ReportOnly
    };
    r.check(
        "group-order",
        "G is all of SL_3(F_q[t]/phi) for primitive phi",
        status,
        json!({"group_order": header.group_order, "sl3_order": want.to_string(), "header": header}),
    );
    Ok(r)
}

pub fn stats(cfg: &RunConfig) -> Result<Report> {
    let x = instance(cfg)?;
    let mut r = Report::new("stats", cfg.echo());
    let q = x.q() as usize;
    let census = (0..x.num_vertices()).all(|v| x.vertex_star(v).len() == q * q * q)
        && (0..x.num_edges()).all(|e| x.edge_star(e).len() == q);
    r.check(
        "census",
        "each vertex lies in q^3 triangles, each edge in q",
        CheckStatus::from_bool(census),
        instance_json(&x),
    );
    let s = spectral_report(&x, &SpectralReportOptions::default())?;
    r.check(
        "link-spectrum",
        "every vertex link has lambda2 = 1/sqrt(q)",
        CheckStatus::from_bool(s.links_match_target),
        json!({"target": s.target, "min": s.link_lambda2_min, "max": s.link_lambda2_max}),
    );
    r.check(
        "link-shape",
        "links are connected bipartite q-regular graphs on 2 q^2 vertices",
        CheckStatus::from_bool(s.links_well_formed),
        json!(null),
    );
    r.check(
        "skeleton-spectrum",
        "lambda2 of the graph (X(0), X(1))",
        CheckStatus::ReportOnly,
        json!({"lambda2": s.skeleton_lambda2}),
    );
    let swap_status = match &s.swap {
        _ if s.swap_bound_vacuous => CheckStatus::Vacuous,
        Some(sw) => CheckStatus::from_bool(sw.within_bound),
        None => CheckStatus::ReportOnly,
    };
    r.check(
        "swap-walk",
        "the swap walk has lambda2 <= 3 gamma",
        swap_status,
        json!({"gamma": s.gamma, "bound": 3.0 * s.gamma, "swap": s.swap, "notes": s.notes}),
    );
    Ok(r)
}

pub fn code(cfg: &RunConfig) -> Result<Report> {
    let x = instance(cfg)?;
    let seed = cfg.seed_or_default();
    let degrees = cfg.triple();
    let mut code = assemble_code(&x, degrees)?;
    let q = x.q();
    let mut r = Report::new("code", cfg.echo());
    r.check(
        "constraints",
        "dense and sparse edge checks span the same space",
        CheckStatus::Pass,
        json!({
            "triangles": code.len(),
            "dense_rows": code.dense_row_count(),
            "sparse_rows": code.sparse_row_count(),
            "lower_bound": code.len().saturating_sub(code.dense_row_count()),
        }),
    );

    let dim = code.dimension(cfg.budget_rank)?;
    r.check(
        "dimension",
        "dim C = |X(2)| - rank of the edge checks",
        CheckStatus::ReportOnly,
        serde_json::to_value(&dim)?,
    );

    let cache = LocalCodeCache::new();
    let zero = vec![0u32; code.len()];
    let mut members = vec![("zero".to_string(), zero)];
    if degrees.iter().all(|&d| d >= 1) {
        let nvars = 9 * x.n();
        members.push((
            "rm-constant".into(),
            rm_restrict(&MultiPoly::constant(nvars, 1), &x)?,
        ));
        for k in upper_slots(x.n()) {
            members.push((format!("rm-var-{k}"), rm_restrict(&MultiPoly::var(nvars, k), &x)?));
        }
    }
    if let Some(gen) = code.generator() {
        for (i, g) in gen.iter().take(8).enumerate() {
            members.push((format!("generator-{i}"), g.clone()));
        }
    }
    let mut results = Vec::new();
    let mut ok = true;
    for (name, w) in &members {
        let m = code.membership(w)?;
        let lm = code.line_membership(w)?;
        let vt = vertex_tester(w, &code, &cache)?;
        let good = m.member && lm.member && vt.rejecting.is_empty();
        ok &= good;
        results.push(json!({"word": name, "member": m.member, "line_member": lm.member, "vertex_rejections": vt.rejecting.len()}));
    }
    r.check(
        "members",
        "known codewords pass the edge, line and vertex tests",
        CheckStatus::from_bool(ok),
        json!(results),
    );

    // A single wrong symbol is caught iff some edge code has distance >= 2.
    let detectable = degrees.iter().any(|&d| d + 2 <= q);
    let base = &members.last().expect("zero word is present").1;
    let mut caught = 0;
    let probes = 10usize;
    for i in 0..probes {
        let bad = corrupt(base, 1, seed.wrapping_add(i as u64), q)?;
        let m = code.membership(&bad)?;
        let lm = code.line_membership(&bad)?;
        if m.member != lm.member {
            return Err(HdxError::Inconsistent("edge and line membership disagree".into()));
        }
        caught += usize::from(!m.member);
    }
    r.check(
        "single-corruption",
        "one changed symbol leaves the code when some d_i <= q - 2",
        CheckStatus::from_bool(caught == if detectable { probes } else { 0 }),
        json!({"probes": probes, "rejected": caught, "detectable": detectable, "seed": seed}),
    );

    if dim.exact {
        let gamma = link_graph(q).spectrum()?.lambda2;
        let mw = min_weight_probe(&code, gamma, DEFAULT_WEIGHT_ENUM_BUDGET, WEIGHT_SAMPLES, seed)?;
        let status = if mw.vacuous {
            CheckStatus::Vacuous
        } else if mw.exact {
            CheckStatus::from_bool(mw.weight as f64 >= mw.relative_bound * code.len() as f64)
        } else {
            CheckStatus::ReportOnly
        };
        r.check(
            "min-weight",
            "distance >= (delta - 2 gamma)(delta - gamma) delta |X(2)|",
            status,
            json!({
                "weight": mw.weight,
                "exact": mw.exact,
                "method": mw.method,
                "delta": mw.delta,
                "gamma": mw.gamma,
                "relative_bound": mw.relative_bound,
                "seed": seed,
            }),
        );
    }

    if let Some(out) = &cfg.out {
        let mut f = BufWriter::new(fs::File::create(out)?);
        code.write_parity(&mut f, true)?;
    }
    Ok(r)
}

pub fn localrate(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.p.unwrap_or(cfg.q);
    let dmax = cfg.dmax.unwrap_or(p.saturating_sub(2));
    if dmax >= p {
        return Err(HdxError::Parameter(format!(
            "--dmax {dmax} must be below p = {p}"
        )));
    }
    let cells: Vec<(u32, u32)> = (0..=dmax)
        .flat_map(|dx| (0..=dmax).map(move |dy| (dx, dy)))
        .collect();
    let specs = cells
        .par_iter()
        .map(|&(dx, dy)| build_local_code(p, dx, dy))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut beyond = Vec::new();
    let mut ok = true;
    eprintln!("{:>4} {:>4} {:>8} {:>8}", "dx", "dy", "formula", "rank");
    for s in &specs {
        let formula = local_dim_formula(s.dx, s.dy);
        let in_range = s.dx + s.dy + 2 <= p;
        eprintln!(
            "{:>4} {:>4} {:>8} {:>8}{}",
            s.dx,
            s.dy,
            formula,
            s.dim,
            if in_range { "" } else { "  (p < dx+dy+2)" }
        );
        let row = json!({"dx": s.dx, "dy": s.dy, "formula": formula, "rank": s.dim});
        if in_range {
            ok &= s.dim as u64 == formula;
            rows.push(row);
        } else {
            beyond.push(row);
        }
    }
    let mut r = Report::new("localrate", cfg.echo());
    r.check(
        "local-rate",
        "dim C_{dx,dy} = (dx+1)(dy+1)(dx+dy+2)/2 when p >= dx+dy+2",
        CheckStatus::from_bool(ok),
        json!({"p": p, "rows": rows}),
    );
    if !beyond.is_empty() {
        r.check(
            "local-rate-beyond",
            "dimensions outside the formula's range",
            CheckStatus::ReportOnly,
            json!({"p": p, "rows": beyond}),
        );
    }
    Ok(r)
}

fn mixing_check(x: &ComplexInstance, seed: u64) -> Result<serde_json::Value> {
    let per_vertex = (0..x.num_vertices())
        .into_par_iter()
        .map(|v| {
            let link = x.vertex_link(v);
            let gamma = link.spectrum()?.lambda2;
            let nv = link.left + link.right;
            let q = x.q() as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(v as u64);
            let mut worst = f64::INFINITY;
            let mut violations = 0usize;
            let mut inside = vec![false; nv];
            for _ in 0..MIXING_SUBSETS {
                let size = rng.random_range(1..=nv);
                inside.iter_mut().for_each(|b| *b = false);
                for i in index::sample(&mut rng, nv, size) {
                    inside[i] = true;
                }
                let induced = link
                    .edges
                    .iter()
                    .filter(|&&(l, r)| inside[l as usize] && inside[link.left + r as usize])
                    .count();
                let delta = 2.0 * induced as f64 / size as f64 / q;
                let slack = size as f64 - (delta - gamma) * nv as f64;
                worst = worst.min(slack);
                violations += usize::from(slack < -1e-9);
            }
            Ok((worst, violations))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_vertex.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let violations: usize = per_vertex.iter().map(|p| p.1).sum();
    Ok(json!({
        "links": x.num_vertices(),
        "subsets_per_link": MIXING_SUBSETS,
        "min_slack": worst,
        "violations": violations,
        "seed": seed,
    }))
}

pub fn identities(cfg: &RunConfig) -> Result<Report> {
    let x = instance(cfg)?;
    let seed = cfg.seed_or_default();
    let mut r = Report::new("identities", cfg.echo());

    let w = walk_identities(&x, DEFAULT_DENSE_EDGE_LIMIT, SAMPLED_WALK_ROWS, seed)?;
    r.check(
        "du-identity",
        "DU = 2/3 M+ + 1/3 I",
        CheckStatus::from_bool(w.du_identity < WALK_TOL),
        json!({"residual": w.du_identity, "verification": w.verification}),
    );
    r.check(
        "swap-identity",
        "M+ UD = 1/2 S D + 1/2 UD",
        CheckStatus::from_bool(w.swap_identity < WALK_TOL),
        json!({"residual": w.swap_identity, "verification": w.verification}),
    );
    r.check(
        "stochastic",
        "every walk is row stochastic",
        CheckStatus::from_bool(w.stochastic_defect < WALK_TOL),
        json!({"defect": w.stochastic_defect}),
    );

    if x.num_edges() <= DEFAULT_DENSE_EDGE_LIMIT {
        let m = walk_matrices(&x, DEFAULT_DENSE_EDGE_LIMIT)?;
        let gamma = spectral_report(
            &x,
            &SpectralReportOptions {
                skeleton: false,
                swap_walk: false,
                ..SpectralReportOptions::default()
            },
        )?
        .gamma;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..UPDOWN_VECTORS {
            let g: Vec<f64> = (0..x.num_edges()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (lhs, rhs) = m.updown_sides(&g, gamma);
            worst = worst.max(lhs - rhs);
        }
        r.check(
            "up-down",
            "<g, M+ g> <= <g, (UD + gamma I) g>",
            CheckStatus::from_bool(worst <= 1e-9),
            json!({"vectors": UPDOWN_VECTORS, "max_excess": worst, "gamma": gamma, "seed": seed}),
        );
    }

    let mut count = 0usize;
    let mut bad = Vec::new();
    for p in [3u32, 5, 7, 11, 13] {
        for m in 0..p {
            for k in 0..=m {
                for rr in 0..=k {
                    let b = binomial_matrix_rank(m, k, rr, p)?;
                    if !b.full_rank {
                        bad.push(json!([p, m, k, rr]));
                    }
                    count += 1;
                }
            }
        }
    }
    r.check(
        "binomial-rank",
        "[C(m-i, k-j)] is invertible mod p for r <= k <= m < p",
        CheckStatus::from_bool(bad.is_empty()),
        json!({"matrices": count, "singular": bad}),
    );

    let mix = mixing_check(&x, seed)?;
    let ok = mix["violations"] == 0;
    r.check(
        "mixing",
        "|T| >= (delta - gamma) |V| in every link",
        CheckStatus::from_bool(ok),
        mix,
    );
    Ok(r)
}

fn perturb(rng: &mut ChaCha8Rng, old: &[u32], p: u32) -> Vec<u32> {
    loop {
        let new: Vec<u32> = (0..old.len()).map(|_| rng.random_range(0..p)).collect();
        if new != old {
            return new;
        }
    }
}

pub fn agree_local(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed.expect("validated in resolve");
    let p = cfg.p.unwrap_or(17);
    let (dx, dy) = cfg.pair();
    let cache = LocalCodeCache::new();
    let spec = cache.get(p, dx, dy)?;
    let pp = (p * p) as usize;
    let (rows, lines) = (cfg.corrupt - cfg.corrupt / 2, cfg.corrupt / 2);
    if rows > pp {
        return Err(HdxError::Parameter(format!(
            "--corrupt {} exceeds 2 p^2",
            cfg.corrupt
        )));
    }
    let records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed.wrapping_add(t);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let coords: Vec<u32> = (0..spec.dim).map(|_| rng.random_range(0..p)).collect();
            let word = spec.encode(&coords)?;
            let mut x = LineEnsemble::from_word(&word, p, dx)?;
            let mut y = SkewEnsemble::from_word(&word, p, dy)?;
            for i in index::sample(&mut rng, pp, rows) {
                let (b, c) = (i as u32 % p, i as u32 / p);
                let new = perturb(&mut rng, x.row(b, c), p);
                x.set_row(b, c, new)?;
            }
            for i in index::sample(&mut rng, pp, lines) {
                let (a, c) = (i as u32 % p, i as u32 / p);
                let new = perturb(&mut rng, y.line(a, c), p);
                y.set_line(a, c, new)?;
            }
            let d = agreement_decode(&x, &y, &cache)?;
            let original = d.q.as_ref().is_some_and(|w| w.eval == word);
            Ok((
                DecodeRecord {
                    p,
                    dx,
                    dy,
                    seed: trial_seed,
                    corruption: Corruption { rows, lines },
                    delta_cubed: d.delta_cubed,
                    e: d.locator_degree,
                    status: d.status,
                    line_disagreement: d.line_disagreement,
                },
                d.hypothesis_holds,
                original,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let covered: Vec<_> = records.iter().filter(|r| r.1).collect();
    let misses = covered
        .iter()
        .filter(|r| !matches!(r.0.status, DecodeStatus::Exact | DecodeStatus::WithinBound))
        .count();
    let status = if covered.is_empty() {
        CheckStatus::Vacuous
    } else {
        CheckStatus::from_bool(misses == 0)
    };
    let tally = |s: DecodeStatus| records.iter().filter(|r| r.0.status == s).count();
    let mut r = Report::new("agree-local", cfg.echo());
    r.check(
        "agreement",
        "p >= 2(dx+dy) + 5 delta p gives Q with line disagreement <= 4 delta",
        status,
        json!({"trials": records.len(), "hypothesis_holds": covered.len(), "misses": misses, "seed": seed}),
    );
    r.check(
        "outcomes",
        "decoder outcome counts",
        CheckStatus::ReportOnly,
        json!({
            "exact": tally(DecodeStatus::Exact),
            "within_bound": tally(DecodeStatus::WithinBound),
            "exceeds_bound": tally(DecodeStatus::ExceedsBound),
            "failed": tally(DecodeStatus::Failed),
            "original_recovered": records.iter().filter(|r| r.2).count(),
            "records": records.iter().map(|r| &r.0).collect::<Vec<_>>(),
        }),
    );
    Ok(r)
}

pub fn correct(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed.expect("validated in resolve");
    let x = instance(cfg)?;
    let mut code = assemble_code(&x, cfg.triple())?;
    exact_dimension(&mut code, cfg.budget_rank)?;
    let cache = LocalCodeCache::new();
    let mut trials = Vec::new();
    let (mut monotone, mut bounded, mut recovered) = (true, true, 0usize);
    for t in 0..cfg.trials as u64 {
        let trial_seed = seed.wrapping_add(t);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let w = code.random_member(&mut rng)?;
        let bad = corrupt(&w, cfg.corrupt, trial_seed, x.q())?;
        let z = views_from_word(&bad, &code, cfg.mode, &cache, cfg.budget_enum)?;
        let out = local_correction(&z, &code, &cache, cfg.budget_enum)?;
        let tr = &out.trace;
        let ok = tr.outcome == CorrectionOutcome::Codeword && out.codeword.as_ref() == Some(&w);
        monotone &= tr.is_monotone();
        bounded &= tr.steps() <= tr.initial.disagreeing_edges;
        recovered += usize::from(ok);
        trials.push(json!({
            "seed": trial_seed,
            "initial_alpha": tr.initial.fraction,
            "final_alpha": tr.final_alpha.fraction,
            "sweeps": tr.sweeps,
            "steps": tr.steps(),
            "outcome": tr.outcome,
            "recovered": ok,
        }));
    }
    let mut r = Report::new("correct", cfg.echo());
    r.check(
        "monotone",
        "each correction step strictly lowers the disagreeing edge count",
        CheckStatus::from_bool(monotone),
        json!({"seed": seed}),
    );
    r.check(
        "step-bound",
        "the number of steps is at most the initial disagreement",
        CheckStatus::from_bool(bounded),
        json!(null),
    );
    r.check(
        "recovery",
        "fraction of corrupted codewords restored",
        CheckStatus::ReportOnly,
        json!({
            "trials": cfg.trials,
            "recovered": recovered,
            "rate": recovered as f64 / cfg.trials.max(1) as f64,
            "records": trials,
        }),
    );
    Ok(r)
}

pub fn multcheck(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed.expect("validated in resolve");
    let x = instance(cfg)?;
    let q = x.q();
    let d = cfg.triple();
    if d.contains(&0) || q < 3 {
        return Err(HdxError::Parameter(
            "multcheck needs every d_i >= 1 and q >= 3".into(),
        ));
    }
    let prod_d = d.map(|v| (2 * v).min(q - 1));
    let factor = assemble_code(&x, d)?;
    let product = assemble_code(&x, prod_d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut factors_ok, mut products_ok, mut translates_ok) = (0usize, 0usize, 0usize);
    for _ in 0..cfg.trials {
        let a = random_rm_word(&x, &mut rng)?;
        let b = random_rm_word(&x, &mut rng)?;
        factors_ok += usize::from(factor.membership(&a)?.member && factor.membership(&b)?.member);
        products_ok += usize::from(product.membership(&multiply(&a, &b, q)?)?.member);
    }
    for _ in 0..cfg.trials {
        let w = random_rm_word(&x, &mut rng)?;
        let g = x.element(rng.random_range(0..x.num_triangles()));
        translates_ok += usize::from(factor.membership(&translate(&w, g, &x)?)?.member);
    }
    let n = cfg.trials;
    let mut r = Report::new("multcheck", cfg.echo());
    r.check(
        "multiplication",
        "C_d * C_d lies in C_{2d}",
        CheckStatus::from_bool(factors_ok == n && products_ok == n),
        json!({"pairs": n, "factors_in_code": factors_ok, "products_in_code": products_ok, "product_degrees": prod_d, "seed": seed}),
    );
    r.check(
        "translation",
        "left translation by G preserves C",
        CheckStatus::from_bool(translates_ok == n),
        json!({"words": n, "preserved": translates_ok, "seed": seed}),
    );
    Ok(r)
}

pub fn merge(cfg: &RunConfig) -> Result<Report> {
    if cfg.input.is_empty() {
        return Err(HdxError::Parameter("report needs --in".into()));
    }
    let reports = cfg
        .input
        .iter()
        .map(|p| Report::from_json(&fs::read_to_string(p)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::merge(&reports))
}
