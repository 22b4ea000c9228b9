use std::collections::BTreeMap;
use std::path::Path;

use hs_twins::bell::{
    classify_mixture, hermitian_schmidt_t, sweep, theorem6_twins, bell_twin_partner, BellMixture, BellTwins,
    MixtureKind, Stratum,
};
use hs_twins::info::{
    classical_mutual_info, joint_distribution, lindblad_check, perfect_correlation, vn_entropy, DEGENERACY_TOL,
};
use hs_twins::linalg::{c64, eigh, hs_norm, op_norm, svd};
use hs_twins::schmidt::{hermitian_osd, osd as general_osd, realign_op, SchmidtDecomp};
use hs_twins::twins::{biortho_groups, classify_twin, twin_space, verify_twin, TwinPair, TWIN_TOL};
use hs_twins::{BipartiteState, HermOp};
use serde_json::{json, Value};

use crate::io::{from_matrix, load_decomp, load_op, load_state};
use crate::report::{num, nums, opt, rank_decision, split_decision, Report};
use crate::{BellAction, CliError, Tols};

fn terms_json(dec: &SchmidtDecomp) -> Value {
    Value::Array(
        dec.terms
            .iter()
            .map(|t| json!({ "coeff": num(t.coeff), "opA": from_matrix(&t.op_a), "opB": from_matrix(&t.op_b) }))
            .collect(),
    )
}

fn pair_json(p: &TwinPair) -> Value {
    json!({
        "a1": from_matrix(p.a1.matrix()),
        "a2": from_matrix(p.a2.matrix()),
        "residual": num(p.residual),
        "commutator1": num(p.commutator1),
        "commutator2": num(p.commutator2),
    })
}

fn strength_json(s: &BipartiteState, p: &TwinPair, tol: f64) -> Value {
    match classify_twin(s, p, tol) {
        Ok(c) => json!({
            "kind": format!("{:?}", c.kind),
            "per_eigenvalue": c.per_eigenvalue.iter().zip(&c.commutators)
                .map(|((a, strong), comm)| json!({ "value": num(*a), "strong": strong, "commutator": num(*comm) }))
                .collect::<Vec<_>>(),
            "global_commutator": num(c.global_commutator),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Spectra of the reduced states and the range decisions taken on them.
fn range_decisions(r: &mut Report, s: &BipartiteState, tol: f64) -> Result<(), CliError> {
    for (name, h) in [("range of rho1", s.rho1()), ("range of rho2", s.rho2())] {
        let eig = eigh(&h, 0.0)?;
        r.decision(split_decision(name, &eig.values, tol));
    }
    Ok(())
}

pub fn osd(echo: String, input: &Path, hermitian: bool, tols: Tols) -> Result<Value, CliError> {
    let (tol, source) = tols.tol();
    let mut r = Report::new(echo, tol, source);
    let f = load_state(input, tols.state_tol)?;
    r.input("state", &f);
    let s = &f.value;
    let dec = if hermitian { hermitian_osd(s, tol)? } else { general_osd(s, tol)? };

    let sigma = s.matrix() / c64(hs_norm(s.matrix()), 0.0);
    let sv = svd(&realign_op(&sigma, s.d1(), s.d2()))?.singular_values;
    r.decision(split_decision("operator Schmidt rank", &sv, tol * sv[0]));

    r.set("d1", json!(s.d1()));
    r.set("d2", json!(s.d2()));
    r.set("hermitian", json!(hermitian));
    r.set("rank", json!(dec.len()));
    r.set("hs_norm", num(hs_norm(s.matrix())));
    r.set("terms", terms_json(&dec));
    r.set("reconstruction_residual", num(dec.residual(s.matrix())));
    r.set("hermiticity_defect", num(dec.hermiticity_defect()));
    Ok(r.into_json())
}

pub fn twins(echo: String, input: &Path, tols: Tols) -> Result<Value, CliError> {
    let (tol, source) = tols.tol();
    let mut r = Report::new(echo, tol, source);
    let f = load_state(input, tols.state_tol)?;
    r.input("state", &f);
    let s = &f.value;
    let basis = twin_space(s, tol)?;
    range_decisions(&mut r, s, tol)?;
    r.decision(rank_decision("twin-space kernel", &basis.kernel));

    let class_tol = TWIN_TOL.max(tol);
    let pairs: Vec<Value> = basis
        .pairs
        .iter()
        .map(|p| {
            let mut v = pair_json(p);
            v["strength"] = strength_json(s, p, class_tol);
            v
        })
        .collect();
    r.set("dim", json!(basis.dim));
    r.set("nontrivial", json!(basis.nontrivial));
    r.set("rank1", json!(basis.rank1));
    r.set("rank2", json!(basis.rank2));
    r.set("classification_tol", num(class_tol));
    r.set("pairs", Value::Array(pairs));
    Ok(r.into_json())
}

fn bell_point(weights: Option<Vec<f64>>, t: Option<Vec<f64>>) -> Result<BellMixture, CliError> {
    match (weights, t) {
        (Some(w), None) if w.len() == 4 => Ok(BellMixture::from_weights([w[0], w[1], w[2], w[3]])?),
        (None, Some(t)) if t.len() == 3 => Ok(BellMixture::from_t([t[0], t[1], t[2]])?),
        _ => Err(CliError::Usage("give exactly one of --weights w1,w2,w3,w0 or --t t1,t2,t3".into())),
    }
}

fn kind_json(k: MixtureKind) -> Value {
    match k {
        MixtureKind::PureBell(b) => json!({ "type": "PureBell", "state": b.to_string() }),
        MixtureKind::BinaryNonSinglet(a) => json!({ "type": "BinaryNonSinglet", "axis": a.index() }),
        MixtureKind::BinarySinglet(a) => json!({ "type": "BinarySinglet", "axis": a.index() }),
        MixtureKind::HigherRank => json!({ "type": "HigherRank" }),
    }
}

fn mixture_json(m: &BellMixture) -> Value {
    json!({ "weights": { "T1": num(m.weights[0]), "T2": num(m.weights[1]), "T3": num(m.weights[2]), "T0": num(m.weights[3]) },
            "t": nums(&m.t) })
}

pub fn bell(
    echo: String,
    weights: Option<Vec<f64>>,
    t: Option<Vec<f64>>,
    action: BellAction,
    tols: Tols,
) -> Result<Value, CliError> {
    let (tol, source) = tols.tol();
    let mut r = Report::new(echo, tol, source);
    if let BellAction::Sweep { grid } = action {
        return bell_sweep(r, grid, tol);
    }
    let m = bell_point(weights, t)?;
    r.set("mixture", mixture_json(&m));
    let class = classify_mixture(&m, tol);
    for (i, d) in class.deviations.iter().enumerate() {
        r.decision(json!({
            "decision": format!("|t{}| = 1", i + 1),
            "deviation": num(*d),
            "cutoff": num(tol),
            "accepted": *d <= tol,
        }));
    }
    r.set("classification", kind_json(class.kind));
    match action {
        BellAction::Classify => {
            r.set("margin", num(class.margin()));
            let binary = class.binary.map(|terms| {
                terms
                    .iter()
                    .map(|(w, k)| json!({ "weight": num(*w), "state": k.to_string() }))
                    .collect::<Vec<_>>()
            });
            r.set("binary_terms", json!(binary));
        }
        BellAction::Twins => {
            let s = m.state()?;
            let basis = twin_space(&s, tol)?;
            r.decision(rank_decision("twin-space kernel", &basis.kernel));
            r.set("twin_space_dim", json!(basis.dim));
            match theorem6_twins(&class) {
                BellTwins::Family(f) => {
                    let (a1, a2) = f.pair(0.0, 1.0);
                    let p = verify_twin(&s, &a1, &a2)?;
                    let sign = if f.sign > 0.0 { "+" } else { "-" };
                    r.set("family", json!({
                        "axis": f.axis.index(),
                        "sign": num(f.sign),
                        "form": format!("A1 = aI + b s{i}, A2 = aI {sign} b s{i}", i = f.axis.index()),
                    }));
                    let mut sample = pair_json(&p);
                    sample["strength"] = strength_json(&s, &p, TWIN_TOL.max(tol));
                    r.set("sample", sample);
                }
                BellTwins::PureState(k) => {
                    let (alpha, beta) = (0.5, [0.3, -0.2, 0.7]);
                    let a1 = HermOp::hermitize(
                        &(0..3).fold(hs_twins::linalg::pauli(0) * c64(alpha, 0.0), |acc, i| {
                            acc + hs_twins::linalg::pauli(i + 1) * c64(beta[i], 0.0)
                        }),
                    );
                    let a2 = bell_twin_partner(k, beta, alpha);
                    let p = verify_twin(&s, &a1, &a2)?;
                    r.set("family", json!({
                        "state": k.to_string(),
                        "form": "all commuting A1 admit twins: A1 = aI + sum b_i s_i, A2 = aI + sum s_i(k) b_i s_i",
                        "signs": nums(&k.t_vector()),
                    }));
                    r.set("sample", pair_json(&p));
                }
                BellTwins::None => {
                    r.set("family", json!({ "form": "only trivial twins (Q1, Q2)" }));
                }
            }
        }
        BellAction::Schmidt => {
            let closed = hermitian_schmidt_t(&m);
            let generic = hermitian_osd(&m.state()?, tol)?;
            let (mut a, mut b) = (closed.coefficients(), generic.coefficients());
            a.sort_by(|x, y| y.total_cmp(x));
            b.sort_by(|x, y| y.total_cmp(x));
            let diff = if a.len() == b.len() {
                a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            r.set("terms", terms_json(&closed));
            r.set("generic_coefficients", nums(&b));
            r.set("max_coefficient_difference", num(diff));
        }
        BellAction::Sweep { .. } => unreachable!("handled above"),
    }
    Ok(r.into_json())
}

fn bell_sweep(mut r: Report, grid: usize, tol: f64) -> Result<Value, CliError> {
    if grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let points = sweep(grid, tol)?;
    let mut by_stratum: BTreeMap<Stratum, Vec<&hs_twins::bell::SweepPoint>> = BTreeMap::new();
    for p in &points {
        by_stratum.entry(p.stratum).or_default().push(p);
    }
    let table: Vec<Value> = by_stratum
        .iter()
        .map(|(st, ps)| {
            let mut dims: Vec<usize> = ps.iter().map(|p| p.dim).collect();
            dims.sort_unstable();
            dims.dedup();
            json!({
                "stratum": st.name(),
                "points": ps.len(),
                "expected_dim": st.expected_dim(),
                "observed_dims": dims,
                "matches": ps.iter().all(|p| p.matches()),
                "min_gap": num(ps.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min)),
            })
        })
        .collect();
    let worst = points.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).expect("grid is nonempty");
    r.decision(json!({
        "decision": "twin-space kernel, smallest gap over the grid",
        "counts": worst.counts,
        "smallest_kept": opt(worst.smallest_kept),
        "largest_dropped": opt(worst.largest_dropped),
        "gap": num(worst.gap),
    }));
    r.set("grid", json!(grid));
    r.set("table", Value::Array(table));
    r.set("all_match", json!(points.iter().all(|p| p.matches())));
    r.set(
        "points",
        Value::Array(
            points
                .iter()
                .map(|p| {
                    json!({
                        "counts": p.counts,
                        "stratum": p.stratum.name(),
                        "dim": p.dim,
                        "smallest_kept": opt(p.smallest_kept),
                        "largest_dropped": opt(p.largest_dropped),
                        "gap": num(p.gap),
                    })
                })
                .collect(),
        ),
    );
    Ok(r.into_json())
}

pub fn info(echo: String, input: &Path, a: &Path, b: &Path, tols: Tols) -> Result<Value, CliError> {
    let (tol, source) = tols.tol();
    let mut r = Report::new(echo, tol, source);
    let f = load_state(input, tols.state_tol)?;
    let fa = load_op(a)?;
    let fb = load_op(b)?;
    r.input("state", &f);
    r.input("a", &fa);
    r.input("b", &fb);
    let s = &f.value;
    let ent = |h: &HermOp| vn_entropy(h, tols.state_tol);
    let (s1, s2, s12) = (ent(&s.rho1())?, ent(&s.rho2())?, ent(s.herm())?);

    let j = joint_distribution(s, &fa.value, &fb.value, DEGENERACY_TOL)?;
    let h = classical_mutual_info(&j);
    let lind = lindblad_check(s, &fa.value, &fb.value)?;
    let pair = verify_twin(s, &fa.value, &fb.value)?;
    r.decision(json!({
        "decision": "observables are twins",
        "residual": num(pair.residual),
        "cutoff": num(TWIN_TOL),
        "accepted": pair.residual <= TWIN_TOL,
    }));

    r.set("entropies", json!({ "S1": num(s1), "S2": num(s2), "S12": num(s12) }));
    r.set("C", num(s1 + s2 - s12));
    r.set("joint", json!({
        "values_a": nums(&j.values_a),
        "values_b": nums(&j.values_b),
        "p": (0..j.p.nrows()).map(|k| nums(&j.p.row(k).iter().copied().collect::<Vec<_>>())).collect::<Vec<_>>(),
    }));
    r.set("H", num(h));
    r.set("lindblad", json!({ "H": num(lind.h), "C": num(lind.c), "ok": lind.ok,
        "note": "H is for this observable pair only and lower-bounds the supremum over all pairs" }));
    let perfect = if pair.residual <= TWIN_TOL {
        match perfect_correlation(s, &pair, tol.max(1e-9)) {
            Ok(pc) => json!({
                "bijection": pc.bijection.iter().map(|(x, y)| nums(&[*x, *y])).collect::<Vec<_>>(),
                "probabilities": nums(&pc.probabilities),
                "H": num(pc.h),
                "H_a": num(pc.h_a),
                "H_b": num(pc.h_b),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    r.set("perfect_correlation", perfect);
    Ok(r.into_json())
}

pub fn separable(echo: String, input: &Path, tols: Tols) -> Result<Value, CliError> {
    let (tol, source) = tols.tol();
    let mut r = Report::new(echo, tol, source);
    let f = load_decomp(input, tols.state_tol)?;
    r.input("decomposition", &f);
    let d = &f.value;
    let terms = d.terms();
    for k in 0..terms.len() {
        for l in (k + 1)..terms.len() {
            let o1 = op_norm(&(terms[k].rho1.matrix() * terms[l].rho1.matrix()));
            let o2 = op_norm(&(terms[k].rho2.matrix() * terms[l].rho2.matrix()));
            r.decision(json!({
                "decision": format!("terms {k} and {l} overlap"),
                "overlap1": num(o1),
                "overlap2": num(o2),
                "cutoff": num(tol),
                "linked": o1 > tol || o2 > tol,
            }));
        }
    }
    let groups = biortho_groups(d, tol)?;
    r.set("terms", json!(terms.len()));
    r.set("components", json!(groups.components));
    r.set("nontrivial", json!(groups.nontrivial));
    r.set(
        "projectors",
        Value::Array(
            groups
                .projectors
                .iter()
                .map(|p| {
                    json!({
                        "p1": from_matrix(p.p1.matrix()),
                        "p2": from_matrix(p.p2.matrix()),
                        "residual": num(p.residual),
                        "commutator": num(p.commutator),
                        "twin": p.residual <= TWIN_TOL,
                    })
                })
                .collect(),
        ),
    );
    Ok(r.into_json())
}
