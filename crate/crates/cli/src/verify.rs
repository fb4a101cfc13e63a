//! Independent re-checking of reports. Positive verdicts are checked from
//! their certificates by substitution; negative verdicts of exhaustive
//! searches (not broadcastable, no protocol) are re-derived.

use gptlab_core::bitcommit::{cheat_binding, hiding_check, reveal_pairs, CommitmentScheme, Component, Exposure};
use gptlab_core::composite::{max_tensor, min_tensor, BipartiteState};
use gptlab_core::geometry::linalg::{dot, kron, nonneg_multiple, vec_eq, Vector};
use gptlab_core::geometry::{same_ray_set, with_eps, FarkasCertificate, LinearProgram, LpOutcome, DEFAULT_EPS};
use gptlab_core::infotasks::{
    broadcast_set_of_map, distinguishing_program, irreducible_decomposition, is_broadcastable, marginal_maps, Broadcast,
};
use gptlab_core::statespace::{is_weakly_self_dual, maps_cone_into, validate_observable, Effect, PositiveMap};
use gptlab_core::teleport::{
    check_group, conclusive_from_isomorphism, is_equivariant, verify_conclusive, verify_deterministic,
    weak_self_duality_necessity, TeleportScheme,
};
use gptlab_core::{Flt, Matrix, Rat, Scalar, ScalarMode, StateSpace};
use serde_json::Value;

use crate::codec::{self, bool_field, field, parse_matrices, parse_matrix, parse_scalar, parse_vector, parse_vectors};
use crate::commands::{honest_acceptances, log2_json, log2_probability};
use crate::error::{CliError, CliResult};
use crate::report::{digest, Report};

/// Outcome at one tolerance (`None` in exact mode).
#[derive(Clone, Debug, PartialEq)]
pub struct SweepLine {
    pub eps: Option<f64>,
    pub failure: Option<String>,
}

impl SweepLine {
    pub fn render(&self) -> String {
        let tol = self.eps.map_or_else(|| "exact".to_string(), |e| format!("eps {e:e}"));
        match &self.failure {
            None => format!("{tol}: pass"),
            Some(why) => format!("{tol}: fail ({why})"),
        }
    }
}

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, what: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Hard errors (malformed file, budget) stay errors; failed checks become
/// messages.
fn soft<T>(r: CliResult<T>, what: &str) -> std::result::Result<CliResult<T>, String> {
    match r {
        Ok(x) => Ok(Ok(x)),
        Err(CliError::Budget(m)) => Ok(Err(CliError::Budget(m))),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

macro_rules! get {
    ($e:expr, $what:expr) => {
        match soft($e, $what)? {
            Ok(x) => x,
            Err(e) => return Ok(Err(e)),
        }
    };
}

/// Verifies a report or space document at each tolerance of the sweep
/// (the recorded one, then `extra`). Exact documents are checked once.
pub fn verify_document(doc: &Value, extra: &[f64]) -> CliResult<Vec<SweepLine>> {
    let mode = codec::document_mode(doc)?;
    let kind = codec::check_header(doc, mode)?.to_string();
    let tolerances: Vec<Option<f64>> = match mode {
        ScalarMode::Exact => vec![None],
        ScalarMode::Float => {
            let recorded = doc.get("eps").and_then(Value::as_f64).unwrap_or(DEFAULT_EPS);
            std::iter::once(recorded)
                .chain(extra.iter().copied())
                .map(Some)
                .collect()
        }
    };
    let mut lines = Vec::new();
    for eps in tolerances {
        let run = || -> CliResult<Check> {
            match mode {
                ScalarMode::Exact => check_kind::<Rat>(&kind, doc),
                ScalarMode::Float => check_kind::<Flt>(&kind, doc),
            }
        };
        let outcome = match eps {
            Some(e) => with_eps(e, run)?,
            None => run(),
        }?;
        lines.push(SweepLine {
            eps,
            failure: outcome.err(),
        });
    }
    Ok(lines)
}

fn check_kind<S: Scalar>(kind: &str, doc: &Value) -> CliResult<Check> {
    match kind {
        "space" => Ok(check_space_file::<S>(doc)),
        "report" => {
            let report = Report::from_document(doc)?;
            if doc.get("inputs_digest").and_then(Value::as_str) != Some(digest(&report.inputs).as_str()) {
                return Ok(Err("inputs digest mismatch".into()));
            }
            check_report::<S>(&report)
        }
        other => Err(CliError::Usage(format!("cannot verify a `{other}` document"))),
    }
}

fn check_space_file<S: Scalar>(doc: &Value) -> Check {
    let v = field(doc, "space").map_err(|e| e.to_string())?;
    let listed = parse_vectors::<S>(field(v, "rays").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let a = codec::parse_space::<S>(v).map_err(|e| format!("space: {e}"))?;
    ensure(
        same_ray_set(a.cone().rays(), &listed),
        "listed rays are not exactly the extreme rays",
    )
}

fn space_of<S: Scalar>(inputs: &Value, key: &str) -> CliResult<StateSpace<S>> {
    codec::parse_space(field(inputs, key)?)
}

fn check_report<S: Scalar>(r: &Report) -> CliResult<Check> {
    let inner = match r.task.as_str() {
        "tensor" => check_tensor::<S>(r),
        "distinguish" => check_distinguish::<S>(r),
        "broadcast" => check_broadcast::<S>(r),
        "nondisturb" => check_nondisturb::<S>(r),
        "bitcommit" => check_bitcommit::<S>(r),
        "teleport" => check_teleport::<S>(r),
        other => Err(format!("unknown task `{other}`")),
    };
    match inner {
        Ok(Ok(())) => Ok(Ok(())),
        Ok(Err(hard)) => Err(hard),
        Err(failed) => Ok(Err(failed)),
    }
}

/// `Err` is a failed check; `Ok(Err)` an error that is not the report's
/// fault (budget exceeded).
type Inner = std::result::Result<CliResult<()>, String>;

fn check_tensor<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "a"), "factor a");
    let b: StateSpace<S> = get!(space_of(&r.inputs, "b"), "factor b");
    let c = get!(space_of::<S>(&r.certificates, "composite"), "composite");
    let expected = match r.inputs["kind"].as_str() {
        Some("min") => get!(min_tensor(&a, &b).map_err(CliError::from), "min tensor"),
        Some("max") => get!(max_tensor(&a, &b).map_err(CliError::from), "max tensor"),
        _ => return Err("unknown tensor kind".into()),
    };
    ensure(
        same_ray_set(c.cone().rays(), expected.space().cone().rays()),
        "composite rays differ",
    )?;
    ensure(
        vec_eq(c.unit(), &kron(a.unit(), b.unit())),
        "composite unit is not u_A (x) u_B",
    )?;
    // min <= C <= max: products of rays inside, products of facets nonnegative
    for x in a.cone().rays() {
        for y in b.cone().rays() {
            ensure(c.cone().contains_fast(&kron(x, y)), "a product state is missing")?;
        }
    }
    for e in a.cone().facets() {
        for f in b.cone().facets() {
            let ef = kron(e, f);
            ensure(
                c.cone().rays().iter().all(|v| dot(&ef, v).is_nonneg()),
                "a product effect is negative",
            )?;
        }
    }
    let Some(rows) = r.certificates.get("states").and_then(Value::as_array) else {
        return ensure(r.verdict == "composite", "verdict without state classification").map(Ok);
    };
    let verts = c.omega_vertices();
    ensure(rows.len() == verts.len(), "not every extreme state is classified")?;
    let (va, vb) = (a.omega_vertices(), b.omega_vertices());
    let mut entangled = 0;
    for row in rows {
        let k = row["vertex"].as_u64().ok_or("vertex index")? as usize;
        let v = verts.get(k).ok_or("vertex index out of range")?;
        if let Some(w) = row.get("witness") {
            let w: Vector<S> = get!(parse_vector(w), "witness");
            for x in va {
                for y in vb {
                    ensure(
                        dot(&w, &kron(x, y)).is_nonneg(),
                        format!("witness of vertex {k} negative on a product"),
                    )?;
                }
            }
            ensure(
                dot(&w, v).is_neg(),
                format!("witness of vertex {k} does not separate it"),
            )?;
            entangled += 1;
        } else {
            let ws = row["weights"].as_array().ok_or("weights")?;
            let mut sum = vec![S::zero(); v.len()];
            for t in ws {
                let (i, j) = (
                    t[0].as_u64().ok_or("weight index")? as usize,
                    t[1].as_u64().ok_or("weight index")? as usize,
                );
                let w: S = get!(parse_scalar(&t[2]), "weight");
                ensure(w.is_nonneg(), format!("negative weight for vertex {k}"))?;
                let p = kron(va.get(i).ok_or("weight index")?, vb.get(j).ok_or("weight index")?);
                for (s, x) in sum.iter_mut().zip(p) {
                    *s += w.clone() * x;
                }
            }
            ensure(vec_eq(&sum, v), format!("weights of vertex {k} do not reproduce it"))?;
        }
    }
    ensure(
        r.certificates["entangled"].as_u64() == Some(entangled),
        "entangled count",
    )?;
    let verdict = if entangled > 0 { "entangled" } else { "separable" };
    ensure(r.verdict == verdict, "verdict does not match the classification")?;
    Ok(Ok(()))
}

fn check_observable<S: Scalar>(a: &StateSpace<S>, states: &[Vector<S>], effects: &[Vector<S>]) -> Check {
    ensure(effects.len() == states.len(), "one effect per state")?;
    ensure(
        validate_observable(a, effects).valid,
        "effects do not form an observable",
    )?;
    for (i, e) in effects.iter().enumerate() {
        for (j, s) in states.iter().enumerate() {
            let want = if i == j { S::one() } else { S::zero() };
            ensure((dot(e, s) - want).is_zero(), format!("effect {i} on state {j}"))?;
        }
    }
    Ok(())
}

fn check_distinguish<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "space"), "space");
    let states: Vec<Vector<S>> = get!(
        parse_vectors(field(&r.inputs, "states").map_err(|e| e.to_string())?),
        "states"
    );
    match r.verdict.as_str() {
        "distinguishable" => {
            let effects: Vec<Vector<S>> = get!(parse_vectors(&r.certificates["observable"]), "observable");
            check_observable(&a, &states, &effects)?;
        }
        "not-distinguishable" => {
            let y: Vector<S> = get!(parse_vector(&r.certificates["farkas"]), "farkas");
            let cert = FarkasCertificate { multipliers: y };
            ensure(
                cert.verify(&distinguishing_program(&a, &states)),
                "Farkas certificate does not verify",
            )?;
        }
        other => return Err(format!("unknown verdict `{other}`")),
    }
    Ok(Ok(()))
}

fn in_hull<S: Scalar>(pts: &[Vector<S>], x: &[S]) -> std::result::Result<bool, String> {
    let mut lp = LinearProgram::nonneg(pts.len());
    for k in 0..x.len() {
        lp.eq(pts.iter().map(|p| p[k].clone()).collect(), x[k].clone());
    }
    lp.eq(vec![S::one(); pts.len()], S::one());
    lp.minimize(vec![S::zero(); pts.len()]);
    Ok(matches!(
        lp.solve().map_err(|e| e.to_string())?,
        LpOutcome::Optimal { .. }
    ))
}

fn check_broadcast<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "space"), "space");
    let gamma: Vec<Vector<S>> = get!(parse_vectors(&r.inputs["states"]), "states");
    let extra: Vec<Vector<S>> = get!(parse_vectors(&r.inputs["extra"]), "extra");
    let budget = r.inputs["budget"].as_u64().ok_or("budget")? as usize;
    let d = a.dim();
    match r.verdict.as_str() {
        "broadcastable" => {
            let simplex: Vec<Vector<S>> = get!(parse_vectors(&r.certificates["simplex"]), "simplex");
            let effects: Vec<Vector<S>> = get!(parse_vectors(&r.certificates["observable"]), "observable");
            let phi: Matrix<S> = get!(parse_matrix(&r.certificates["broadcaster"]), "broadcaster");
            ensure(
                simplex.iter().all(|s| a.contains_state(s)),
                "simplex vertex is not a state",
            )?;
            check_observable(&a, &simplex, &effects)?;
            for (k, g) in gamma.iter().enumerate() {
                ensure(in_hull(&simplex, g)?, format!("state {k} is outside the simplex"))?;
            }
            ensure(phi.rows() == d * d && phi.cols() == d, "broadcaster shape")?;
            let mut expect = Matrix::zeros(d * d, d);
            for (s, e) in simplex.iter().zip(&effects) {
                expect = expect.add(&Matrix::outer(&kron(s, s), e));
            }
            ensure(phi == expect, "broadcaster is not sum of (s (x) s) a^T")?;
            for x in a.cone().rays() {
                let img = phi.apply(x);
                for e in a.cone().facets() {
                    for f in a.cone().facets() {
                        ensure(
                            dot(&kron(e, f), &img).is_nonneg(),
                            "broadcaster is not positive into A (x)max A",
                        )?;
                    }
                }
            }
            let (ma, mb) = marginal_maps(&a, &phi);
            for (k, g) in gamma.iter().enumerate() {
                ensure(
                    vec_eq(&ma.apply(g), g) && vec_eq(&mb.apply(g), g),
                    format!("state {k} is not broadcast"),
                )?;
            }
            let listed: Vec<Vector<S>> = get!(parse_vectors(&r.certificates["broadcast_set"]), "broadcast_set");
            let set = get!(
                broadcast_set_of_map(&a, &PositiveMap { matrix: phi }).map_err(CliError::from),
                "broadcast set"
            );
            ensure(same_ray_set(&listed, &set.vertices), "broadcast set differs")?;
            ensure(
                same_ray_set(&listed, &simplex),
                "broadcast set of the cloner is not the simplex",
            )?;
        }
        "not-broadcastable" => {
            let again = get!(
                is_broadcastable(&a, &gamma, &extra, budget).map_err(CliError::from),
                "search"
            );
            match again {
                Broadcast::NotBroadcastable { candidates, max_size } => ensure(
                    r.certificates["candidates"].as_u64() == Some(candidates as u64)
                        && r.certificates["max_size"].as_u64() == Some(max_size as u64),
                    "search statistics differ",
                )?,
                Broadcast::Broadcastable { .. } => return Err("re-run of the search found a broadcaster".into()),
            }
        }
        other => return Err(format!("unknown verdict `{other}`")),
    }
    Ok(Ok(()))
}

fn check_nondisturb<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "space"), "space");
    let d = a.dim();
    let rays = a.cone().rays();
    let ps: Vec<Matrix<S>> = get!(parse_matrices(&r.certificates["projections"]), "projections");
    let summands: Vec<Vec<usize>> = r.certificates["summands"]
        .as_array()
        .ok_or("summands")?
        .iter()
        .map(|s| {
            s.as_array()
                .map(|v| v.iter().filter_map(|i| i.as_u64().map(|i| i as usize)).collect())
        })
        .collect::<Option<_>>()
        .ok_or("summands")?;
    ensure(ps.len() == summands.len(), "one projection per summand")?;
    let mut total = Matrix::zeros(d, d);
    for (i, p) in ps.iter().enumerate() {
        ensure(p.rows() == d && p.cols() == d, "projection shape")?;
        ensure(p.mul(p) == *p, format!("projection {i} is not idempotent"))?;
        for (j, q) in ps.iter().enumerate() {
            if i != j {
                ensure(
                    p.mul(q) == Matrix::zeros(d, d),
                    format!("projections {i} and {j} overlap"),
                )?;
            }
        }
        total = total.add(p);
    }
    ensure(total == Matrix::identity(d), "projections do not sum to the identity")?;
    let mut owner = vec![None; rays.len()];
    for (i, s) in summands.iter().enumerate() {
        for &k in s {
            let ray = rays.get(k).ok_or("ray index")?;
            ensure(owner[k].is_none(), format!("ray {k} in two summands"))?;
            owner[k] = Some(i);
            for (j, p) in ps.iter().enumerate() {
                let img = p.apply(ray);
                let ok = if i == j {
                    vec_eq(&img, ray)
                } else {
                    img.iter().all(Scalar::is_zero)
                };
                ensure(ok, format!("projection {j} on ray {k}"))?;
            }
        }
    }
    ensure(owner.iter().all(Option::is_some), "a ray belongs to no summand")?;
    let dec = get!(
        irreducible_decomposition(a.cone()).map_err(CliError::from),
        "decomposition"
    );
    ensure(dec.summands.len() == summands.len(), "decomposition is not the finest")?;
    let Some(class) = r.certificates.get("classification") else {
        return ensure(r.verdict == "decomposed", "verdict").map(Ok);
    };
    let t: Matrix<S> = get!(parse_matrix(&r.inputs["map"]), "map");
    ensure(t.rows() == d && t.cols() == d, "map shape")?;
    if let Some(cs) = class.get("constants") {
        let cs: Vector<S> = get!(parse_vector(cs), "constants");
        ensure(cs.len() == ps.len() && cs.iter().all(Scalar::is_nonneg), "constants")?;
        let sum = ps
            .iter()
            .zip(&cs)
            .fold(Matrix::zeros(d, d), |acc, (p, c)| acc.add(&p.scaled(c)));
        ensure(sum == t, "map is not the combination of projections")?;
        ensure(r.verdict == "nondisturbing", "verdict")?;
    } else if let Some(k) = class.get("moves_ray").and_then(Value::as_u64) {
        let ray = rays.get(k as usize).ok_or("ray index")?;
        ensure(
            nonneg_multiple(&t.apply(ray), ray).is_none(),
            format!("ray {k} is not moved"),
        )?;
        ensure(r.verdict == "disturbing", "verdict")?;
    } else if let Some(u) = class.get("unequal_scaling") {
        let s = u["summand"].as_u64().ok_or("summand")? as usize;
        let (i, j) = (
            u["rays"][0].as_u64().ok_or("ray")? as usize,
            u["rays"][1].as_u64().ok_or("ray")? as usize,
        );
        let members = summands.get(s).ok_or("summand index")?;
        ensure(members.contains(&i) && members.contains(&j), "rays not in the summand")?;
        let ci = nonneg_multiple(&t.apply(&rays[i]), &rays[i]).ok_or("first ray moved")?;
        let cj = nonneg_multiple(&t.apply(&rays[j]), &rays[j]).ok_or("second ray moved")?;
        ensure(ci != cj, "scalings are equal")?;
        ensure(r.verdict == "disturbing", "verdict")?;
    } else {
        return Err("unknown classification".into());
    }
    Ok(Ok(()))
}

fn rebuild_scheme<S: Scalar>(
    a: &StateSpace<S>,
    v: &Value,
) -> std::result::Result<CliResult<CommitmentScheme<S>>, String> {
    let omega: Vector<S> = get!(parse_vector(&v["omega"]), "omega");
    let mut decomps: [Vec<Component<S>>; 2] = [Vec::new(), Vec::new()];
    let lists = v["decompositions"].as_array().ok_or("decompositions")?;
    ensure(lists.len() == 2, "two decompositions")?;
    for (b, list) in lists.iter().enumerate() {
        for c in list.as_array().ok_or("decomposition")? {
            let vertex = c["vertex"].as_u64().ok_or("vertex")? as usize;
            let state = a.omega_vertices().get(vertex).ok_or("vertex index")?.clone();
            decomps[b].push(Component {
                prob: get!(parse_scalar(&c["prob"]), "prob"),
                vertex,
                state,
                exposer: Exposure {
                    effect: Effect(get!(parse_vector(&c["exposer"]), "exposer")),
                    gap: get!(parse_scalar(&c["gap"]), "gap"),
                },
            });
        }
    }
    Ok(Ok(CommitmentScheme {
        space: a.clone(),
        omega,
        decomps,
    }))
}

fn check_bitcommit<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "space"), "space");
    if r.verdict == "no-scheme" {
        return ensure(a.is_simplex(), "a non-simplex always has a double decomposition").map(Ok);
    }
    let scheme = get!(rebuild_scheme(&a, &r.certificates["scheme"])?, "scheme");
    scheme.check().map_err(|e| format!("scheme: {e}"))?;
    for (b, dec) in scheme.decomps.iter().enumerate() {
        for c in dec {
            ensure(
                (c.exposer.effect.prob(&c.state) - S::one()).is_zero(),
                format!("exposer of bit {b} misses its state"),
            )?;
            for (k, v) in a.omega_vertices().iter().enumerate() {
                if k != c.vertex {
                    let gap_ok = (S::one() - c.exposer.effect.prob(v) - c.exposer.gap.clone()).is_nonneg();
                    ensure(gap_ok, format!("gap of vertex {} violated at vertex {k}", c.vertex))?;
                }
            }
        }
    }
    let runs = r.inputs["runs"].as_u64().ok_or("runs")? as usize;
    let subsystems = r.inputs["subsystems"].as_u64().ok_or("subsystems")? as usize;
    let seed = r.inputs["seed"].as_u64().ok_or("seed")?;
    let accepted = &r.certificates["soundness"]["accepted"];
    for b in 0..2u8 {
        let again = get!(honest_acceptances(&scheme, b, runs, subsystems, seed), "honest runs");
        ensure(
            accepted[b as usize].as_u64() == Some(again as u64),
            format!("honest run count for bit {b}"),
        )?;
    }
    for h in r.certificates["hiding"].as_array().ok_or("hiding")? {
        let n = h["n"].as_u64().ok_or("hiding n")? as usize;
        let again = get!(hiding_check(&scheme, n).map_err(CliError::from), "hiding");
        ensure(h["equal"].as_bool() == Some(again.equal), format!("hiding at n = {n}"))?;
        ensure(
            h["matches_omega"].as_bool() == Some(again.matches_omega),
            format!("hiding mixture at n = {n}"),
        )?;
    }
    let pairs: Vec<(S, S)> = reveal_pairs(&scheme);
    let listed = r.certificates["reveal_pairs"].as_array().ok_or("reveal_pairs")?;
    ensure(listed.len() == pairs.len(), "reveal pairs differ")?;
    for (l, (x, y)) in listed.iter().zip(&pairs) {
        let lx: S = get!(parse_scalar(&l[0]), "pair");
        let ly: S = get!(parse_scalar(&l[1]), "pair");
        ensure(lx == *x && ly == *y, "reveal pairs differ")?;
    }
    for b in r.certificates["binding"].as_array().ok_or("binding")? {
        let n = b["n"].as_u64().ok_or("binding n")? as usize;
        let p: S = get!(parse_scalar(&b["probability"]), "probability");
        let p0: S = get!(parse_scalar(&b["reveal"][0]), "reveal");
        let p1: S = get!(parse_scalar(&b["reveal"][1]), "reveal");
        ensure(
            p == p0.clone() + p1.clone() - S::one(),
            format!("binding at n = {n}: P0 + P1 - 1"),
        )?;
        let again = get!(cheat_binding(&scheme, n).map_err(CliError::from), "binding");
        ensure(again.probability == p, format!("binding at n = {n}"))?;
        ensure(b["log2"] == log2_json(log2_probability(&p)), format!("log2 at n = {n}"))?;
    }
    Ok(Ok(()))
}

fn check_teleport<S: Scalar>(r: &Report) -> Inner {
    let a: StateSpace<S> = get!(space_of(&r.inputs, "space"), "space");
    let budget = r.inputs["budget"].as_u64().ok_or("budget")? as usize;
    let c = &r.certificates;
    match r.inputs["mode"].as_str() {
        Some("group") => {
            let group: Vec<Matrix<S>> = get!(parse_matrices(&c["group"]), "group");
            let w: Matrix<S> = get!(parse_matrix(&c["omega"]), "omega");
            let omega_hat: Matrix<S> = get!(parse_matrix(&c["omega_hat"]), "omega_hat");
            let effects: Vec<Vector<S>> = get!(parse_vectors(&c["effects"]), "effects");
            let corrections: Vec<Matrix<S>> = get!(parse_matrices(&c["corrections"]), "corrections");
            let eta: Matrix<S> = get!(parse_matrix(&c["eta"]), "eta");
            check_group(&a, &group).map_err(|e| format!("group: {e}"))?;
            ensure(
                w.transpose() == omega_hat,
                "omega_hat is not the transpose of the state matrix",
            )?;
            ensure(is_equivariant(&omega_hat, &group), "omega_hat is not equivariant")?;
            let inv = omega_hat.inverse().ok_or("omega_hat is singular")?;
            let dual = a.cone().dual();
            ensure(
                maps_cone_into(&omega_hat, &dual, a.cone()) && maps_cone_into(&inv, a.cone(), &dual),
                "omega_hat is not an order isomorphism",
            )?;
            ensure(
                effects.len() == group.len() && corrections.len() == group.len(),
                "one outcome per element",
            )?;
            let scale = S::one() / S::from_i64(group.len() as i64);
            for (i, g) in group.iter().enumerate() {
                let fh = inv.mul(g).scaled(&scale);
                ensure(
                    vec_eq(fh.transpose().as_slice(), &effects[i]),
                    format!("effect {i} is not omega_hat^-1 g / |G|"),
                )?;
                ensure(
                    Some(corrections[i].clone()) == g.inverse(),
                    format!("correction {i} is not g^-1"),
                )?;
            }
            let omega = BipartiteState::new(w, &a, &a).map_err(|e| format!("omega: {e}"))?;
            let scheme = TeleportScheme {
                a: a.clone(),
                b: a.clone(),
                effects,
                omega,
                corrections,
                eta,
                group,
            };
            let v = verify_deterministic(&scheme).map_err(|e| format!("protocol: {e}"))?;
            if let Some((i, why)) = &v.failure {
                return Err(format!("outcome {i}: {why}"));
            }
            let listed = c["probabilities"].as_array().ok_or("probabilities")?;
            ensure(listed.len() == v.probabilities.len(), "probability table")?;
            for (row, got) in listed.iter().zip(&v.probabilities) {
                let row: Vector<S> = get!(parse_vector(row), "probabilities");
                ensure(vec_eq(&row, got), "outcome probabilities differ")?;
            }
            ensure(r.verdict == "verified", "verdict")?;
        }
        Some("conclusive") => {
            if r.verdict == "no-protocol" {
                let again = get!(
                    weak_self_duality_necessity(&a, budget).map_err(CliError::from),
                    "search"
                );
                return ensure(!again.protocol_found, "re-run of the search found a protocol").map(Ok);
            }
            let f: Vector<S> = get!(parse_vector(&c["f"]), "f");
            let w: Matrix<S> = get!(parse_matrix(&c["omega"]), "omega");
            let tau: Matrix<S> = get!(parse_matrix(&c["tau"]), "tau");
            let eta: Matrix<S> = get!(parse_matrix(&c["eta"]), "eta");
            let omega = BipartiteState::new(w, &a, &a).map_err(|e| format!("omega: {e}"))?;
            let v = verify_conclusive(&a, &a, &f, &omega, &tau, &eta).map_err(|e| format!("protocol: {e}"))?;
            ensure(v.verified, format!("identity fails at vertex {:?}", v.failing_vertex))?;
            let success: Vector<S> = get!(parse_vector(&c["success"]), "success");
            ensure(vec_eq(&success, &v.success), "success probabilities differ")?;
            ensure(r.verdict == "verified", "verdict")?;
        }
        Some("necessity") => {
            let wsd = bool_field(c, "weakly_self_dual").map_err(|e| e.to_string())?;
            let found = bool_field(c, "protocol_found").map_err(|e| e.to_string())?;
            if wsd {
                let t: Matrix<S> = get!(
                    parse_matrix(c.get("isomorphism").ok_or("isomorphism missing")?),
                    "isomorphism"
                );
                let dual = a.cone().dual();
                let inv = t.inverse().ok_or("isomorphism is singular")?;
                ensure(
                    maps_cone_into(&t, a.cone(), &dual) && maps_cone_into(&inv, &dual, a.cone()),
                    "isomorphism is not an order isomorphism A -> A*",
                )?;
            } else {
                let again = get!(
                    is_weakly_self_dual(&a, budget).map_err(CliError::from),
                    "weak self-duality"
                );
                ensure(!again.weakly_self_dual, "re-run found an isomorphism A -> A*")?;
            }
            if found {
                let wh: Matrix<S> = get!(parse_matrix(c.get("witness").ok_or("witness missing")?), "witness");
                let (f, omega) = conclusive_from_isomorphism(&a, &a, &wh).map_err(|e| format!("witness: {e}"))?;
                let id = Matrix::identity(a.dim());
                let v = verify_conclusive(&a, &a, &f, &omega, &id, &id).map_err(|e| format!("witness: {e}"))?;
                ensure(v.verified, "witness protocol does not verify")?;
            } else {
                let again = get!(
                    weak_self_duality_necessity(&a, budget).map_err(CliError::from),
                    "search"
                );
                ensure(!again.protocol_found, "re-run of the search found a protocol")?;
            }
            let consistent = wsd || !found;
            ensure(c["consistent"].as_bool() == Some(consistent), "consistency flag")?;
            ensure(
                r.verdict == if consistent { "consistent" } else { "inconsistent" },
                "verdict",
            )?;
        }
        _ => return Err("unknown teleport mode".into()),
    }
    Ok(Ok(()))
}
