//! One function per subcommand. Each resolves its operands, runs the core
//! procedure and packages the verdict with its certificates.

use std::path::Path;

use gptlab_core::bitcommit::{
    cheat_binding, find_double_decomposition, hiding_check, reveal_pairs, run_honest, symmetric_cheat_value,
    CommitmentScheme,
};
use gptlab_core::composite::{is_composite, max_tensor, min_tensor, BipartiteState, Separability};
use gptlab_core::geometry::linalg::Vector;
use gptlab_core::infotasks::{
    broadcast_set_of_map, irreducible_decomposition, is_broadcastable, is_nondisturbing, jointly_distinguishable,
    nondisturbing_basis, Broadcast, Distinguishability, Nondisturbance, DEFAULT_SUBSET_BUDGET,
};
use gptlab_core::statespace::{is_weakly_self_dual, DEFAULT_ISO_BUDGET};
use gptlab_core::teleport::{
    build_deterministic_from_group, conclusive_from_isomorphism, find_equivariant_omega_hat, verify_conclusive,
    verify_deterministic, weak_self_duality_necessity,
};
use gptlab_core::{GptError, Matrix, Scalar, ScalarMode, StateSpace};
use serde_json::{json, Map, Value};

use crate::args::TensorKind;
use crate::codec;
use crate::error::{CliError, CliResult};
use crate::report::Report;
use crate::specs;

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub command: Vec<String>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub eps: Option<f64>,
}

impl Ctx {
    fn report<S: Scalar>(&self, task: &str, inputs: Value, verdict: &str, certificates: Value) -> Report {
        Report {
            task: task.into(),
            command: self.command.clone(),
            inputs,
            verdict: verdict.into(),
            certificates,
            mode: S::MODE,
            eps: match S::MODE {
                ScalarMode::Exact => None,
                ScalarMode::Float => Some(self.eps.unwrap_or_else(gptlab_core::geometry::eps)),
            },
            timing_ms: None,
        }
    }
}

pub fn space_document<S: Scalar>(a: &StateSpace<S>) -> Value {
    let mut m = Map::new();
    m.insert("space".into(), codec::space(a));
    codec::document("space", S::MODE, m)
}

pub fn cmd_space<S: Scalar>(kind: &str, param: Option<&str>, dual: bool) -> CliResult<Value> {
    let a = specs::builtin::<S>(kind, param)?;
    Ok(space_document(&if dual { a.dual_space() } else { a }))
}

fn states<S: Scalar>(a: &StateSpace<S>, specs_: &[String]) -> CliResult<Vec<Vector<S>>> {
    specs_.iter().map(|s| specs::state(a, s)).collect()
}

pub fn cmd_tensor<S: Scalar>(ctx: &Ctx, a: &str, b: &str, kind: TensorKind, entanglement: bool) -> CliResult<Report> {
    let (a, b) = (specs::space::<S>(a)?, specs::space::<S>(b)?);
    let c = match kind {
        TensorKind::Min => min_tensor(&a, &b)?,
        TensorKind::Max => max_tensor(&a, &b)?,
    };
    let kind_name = match kind {
        TensorKind::Min => "min",
        TensorKind::Max => "max",
    };
    let inputs = json!({"a": codec::space(&a), "b": codec::space(&b), "kind": kind_name, "entanglement": entanglement});
    let mut certs = Map::new();
    certs.insert("composite".into(), codec::space(c.space()));
    certs.insert("sandwich".into(), json!(is_composite(c.space().cone(), &a, &b)));
    let mut verdict = "composite";
    if entanglement {
        let mut rows = Vec::new();
        let mut entangled = 0usize;
        for (k, v) in c.space().omega_vertices().iter().enumerate() {
            let omega = BipartiteState::from_vector(v, &a, &b)?;
            rows.push(match omega.separability()? {
                Separability::Separable { weights } => json!({
                    "vertex": k,
                    "weights": weights.iter().map(|(i, j, w)| json!([i, j, codec::scalar(w)])).collect::<Vec<_>>(),
                }),
                Separability::Entangled { witness } => {
                    entangled += 1;
                    json!({"vertex": k, "witness": codec::vector(&witness)})
                }
            });
        }
        certs.insert("states".into(), Value::Array(rows));
        certs.insert("entangled".into(), json!(entangled));
        verdict = if entangled > 0 { "entangled" } else { "separable" };
    }
    Ok(ctx.report::<S>("tensor", inputs, verdict, Value::Object(certs)))
}

pub fn cmd_distinguish<S: Scalar>(ctx: &Ctx, space: &str, state_specs: &[String]) -> CliResult<Report> {
    let a = specs::space::<S>(space)?;
    let st = states(&a, state_specs)?;
    let inputs = json!({"space": codec::space(&a), "states": codec::vectors(&st)});
    Ok(match jointly_distinguishable(&a, &st)? {
        Distinguishability::Distinguishable(obs) => {
            let effects: Vec<Vector<S>> = obs.effects.iter().map(|e| e.0.clone()).collect();
            ctx.report::<S>(
                "distinguish",
                inputs,
                "distinguishable",
                json!({"observable": codec::vectors(&effects)}),
            )
        }
        Distinguishability::NotDistinguishable(cert) => ctx.report::<S>(
            "distinguish",
            inputs,
            "not-distinguishable",
            json!({"farkas": codec::vector(&cert.multipliers)}),
        ),
    })
}

pub fn cmd_broadcast<S: Scalar>(ctx: &Ctx, space: &str, gamma: &[String], extra: &[String]) -> CliResult<Report> {
    let a = specs::space::<S>(space)?;
    let (g, x) = (states(&a, gamma)?, states(&a, extra)?);
    let budget = ctx.budget.unwrap_or(DEFAULT_SUBSET_BUDGET);
    let inputs = json!({
        "space": codec::space(&a),
        "states": codec::vectors(&g),
        "extra": codec::vectors(&x),
        "budget": budget,
    });
    Ok(match is_broadcastable(&a, &g, &x, budget)? {
        Broadcast::Broadcastable {
            simplex,
            observable,
            broadcaster,
        } => {
            let set = broadcast_set_of_map(&a, &broadcaster)?;
            let effects: Vec<Vector<S>> = observable.effects.iter().map(|e| e.0.clone()).collect();
            let certs = json!({
                "simplex": codec::vectors(&simplex),
                "observable": codec::vectors(&effects),
                "broadcaster": codec::matrix(&broadcaster.matrix),
                "broadcast_set": codec::vectors(&set.vertices),
            });
            ctx.report::<S>("broadcast", inputs, "broadcastable", certs)
        }
        Broadcast::NotBroadcastable { candidates, max_size } => ctx.report::<S>(
            "broadcast",
            inputs,
            "not-broadcastable",
            json!({"candidates": candidates, "max_size": max_size}),
        ),
    })
}

pub fn cmd_nondisturb<S: Scalar>(ctx: &Ctx, space: &str, map: Option<&str>) -> CliResult<Report> {
    let a = specs::space::<S>(space)?;
    let t = map.map(specs::matrix::<S>).transpose()?;
    let mut inputs = json!({"space": codec::space(&a)});
    if let Some(t) = &t {
        inputs["map"] = codec::matrix(t);
    }
    let dec = irreducible_decomposition(a.cone())?;
    let basis = nondisturbing_basis(a.cone())?;
    let projections: Vec<Matrix<S>> = basis.into_iter().map(|p| p.matrix).collect();
    let summands: Vec<Value> = dec.summands.iter().map(|s| json!(s.rays)).collect();
    let mut certs = json!({"summands": summands, "projections": codec::matrices(&projections)});
    let mut verdict = "decomposed";
    if let Some(t) = &t {
        let class = is_nondisturbing(a.cone(), t)?;
        verdict = if class.is_nondisturbing() {
            "nondisturbing"
        } else {
            "disturbing"
        };
        certs["classification"] = match class {
            Nondisturbance::Nondisturbing { constants } => json!({"constants": codec::vector(&constants)}),
            Nondisturbance::MovesRay { ray } => json!({"moves_ray": ray}),
            Nondisturbance::UnequalScaling { summand, rays } => {
                json!({"unequal_scaling": {"summand": summand, "rays": [rays.0, rays.1]}})
            }
        };
    }
    Ok(ctx.report::<S>("nondisturb", inputs, verdict, certs))
}

pub fn scheme_json<S: Scalar>(scheme: &CommitmentScheme<S>) -> Value {
    let decomps: Vec<Value> = scheme
        .decomps
        .iter()
        .map(|dec| {
            Value::Array(
                dec.iter()
                    .map(|c| {
                        json!({
                            "prob": codec::scalar(&c.prob),
                            "vertex": c.vertex,
                            "exposer": codec::vector(&c.exposer.effect.0),
                            "gap": codec::scalar(&c.exposer.gap),
                        })
                    })
                    .collect(),
            )
        })
        .collect();
    json!({"omega": codec::vector(&scheme.omega), "decompositions": decomps, "total_size": scheme.total_size()})
}

/// Number of accepted honest runs for bit `b`; run `r` uses seed `seed + b * runs + r`.
pub fn honest_acceptances<S: Scalar>(
    scheme: &CommitmentScheme<S>,
    b: u8,
    runs: usize,
    subsystems: usize,
    seed: u64,
) -> CliResult<usize> {
    let mut accepted = 0;
    for r in 0..runs {
        let s = seed.wrapping_add((b as u64) * runs as u64 + r as u64);
        if run_honest(scheme, b, subsystems, s)?.accept {
            accepted += 1;
        }
    }
    Ok(accepted)
}

pub fn log2_probability<S: Scalar>(p: &S) -> f64 {
    p.to_f64().log2()
}

/// The binding series as CSV: header row, LF line endings.
pub fn binding_csv(report: &Report) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(["n", "probability", "log2-probability"]).map_err(io)?;
    for row in report
        .certificates
        .get("binding")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
    {
        let n = row["n"].to_string();
        let p = match &row["probability"] {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        w.write_record([
            n,
            p,
            row["log2"]
                .as_str()
                .map(String::from)
                .unwrap_or_else(|| row["log2"].to_string()),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bitcommit<S: Scalar>(
    ctx: &Ctx,
    space: &str,
    n: &str,
    runs: usize,
    subsystems: usize,
    hiding: usize,
) -> CliResult<Report> {
    let a = specs::space::<S>(space)?;
    let range = specs::range(n)?;
    let inputs = json!({
        "space": codec::space(&a),
        "n": [range.start(), range.end()],
        "runs": runs,
        "subsystems": subsystems,
        "hiding": hiding,
        "seed": ctx.seed,
    });
    let Some(scheme) = find_double_decomposition(&a, true)? else {
        return Ok(ctx.report::<S>("bitcommit", inputs, "no-scheme", json!({"simplex": a.is_simplex()})));
    };
    let exact: Vec<Value> = scheme
        .decomps
        .iter()
        .map(|dec| {
            Value::Array(
                dec.iter()
                    .map(|c| codec::scalar(&c.exposer.effect.prob(&c.state)))
                    .collect(),
            )
        })
        .collect();
    let accepted = [
        honest_acceptances(&scheme, 0, runs, subsystems, ctx.seed)?,
        honest_acceptances(&scheme, 1, runs, subsystems, ctx.seed)?,
    ];
    let mut hid = Vec::new();
    for k in 1..=hiding {
        let h = hiding_check(&scheme, k)?;
        hid.push(json!({"n": k, "equal": h.equal, "matches_omega": h.matches_omega}));
    }
    let mut binding = Vec::new();
    for k in range {
        let b = cheat_binding(&scheme, k)?;
        binding.push(json!({
            "n": k,
            "probability": codec::scalar(&b.probability),
            "reveal": [codec::scalar(&b.reveal.0), codec::scalar(&b.reveal.1)],
            "log2": log2_json(log2_probability(&b.probability)),
        }));
    }
    let sound = accepted.iter().all(|&c| c == runs)
        && scheme
            .decomps
            .iter()
            .flatten()
            .all(|c| (c.exposer.effect.prob(&c.state) - S::one()).is_zero());
    let hides = hid.iter().all(|h| h["equal"] == json!(true));
    let binds = binding
        .iter()
        .all(|b| b["log2"].as_f64().is_some_and(|x| x < 0.0) || b["log2"] == json!("-inf"));
    let pairs: Vec<Value> = reveal_pairs(&scheme)
        .iter()
        .map(|(x, y)| json!([codec::scalar(x), codec::scalar(y)]))
        .collect();
    let certs = json!({
        "scheme": scheme_json(&scheme),
        "soundness": {"exact": exact, "accepted": accepted},
        "hiding": hid,
        "binding": binding,
        "reveal_pairs": pairs,
        "symmetric_value": codec::scalar(&symmetric_cheat_value(&scheme)?),
    });
    let verdict = if sound && hides && binds { "secure" } else { "insecure" };
    Ok(ctx.report::<S>("bitcommit", inputs, verdict, certs))
}

/// JSON has no infinities; `log2(0)` is written as the string `-inf`.
pub fn log2_json(x: f64) -> Value {
    if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

pub enum TeleportMode<'a> {
    Group(&'a str),
    Conclusive,
    Necessity,
}

pub fn cmd_teleport<S: Scalar>(ctx: &Ctx, space: &str, mode: TeleportMode<'_>) -> CliResult<Report> {
    let a = specs::space::<S>(space)?;
    let budget = ctx.budget.unwrap_or(DEFAULT_ISO_BUDGET);
    let mut inputs = json!({"space": codec::space(&a), "budget": budget});
    match mode {
        TeleportMode::Group(name) => {
            inputs["mode"] = json!("group");
            inputs["group"] = json!(name);
            let group = specs::group(&a, name)?;
            gptlab_core::teleport::check_group(&a, &group)?;
            let omega_hat = find_equivariant_omega_hat(&a, &group, budget)?
                .ok_or_else(|| GptError::NotEquivariant(format!("no {name}-equivariant order isomorphism A* -> A")))?;
            let scheme = build_deterministic_from_group(&a, &group, &omega_hat)?;
            let verdict = verify_deterministic(&scheme)?;
            let probs: Vec<Value> = verdict.probabilities.iter().map(|row| codec::vector(row)).collect();
            let certs = json!({
                "effects": codec::vectors(&scheme.effects),
                "omega": codec::matrix(scheme.omega.matrix()),
                "omega_hat": codec::matrix(&omega_hat),
                "corrections": codec::matrices(&scheme.corrections),
                "eta": codec::matrix(&scheme.eta),
                "group": codec::matrices(&scheme.group),
                "probabilities": probs,
            });
            let v = if verdict.verified { "verified" } else { "failed" };
            Ok(ctx.report::<S>("teleport", inputs, v, certs))
        }
        TeleportMode::Conclusive => {
            inputs["mode"] = json!("conclusive");
            let search = weak_self_duality_necessity(&a, budget)?;
            let Some(wh) = search.witness else {
                return Ok(ctx.report::<S>(
                    "teleport",
                    inputs,
                    "no-protocol",
                    json!({"candidates": search.candidates, "weakly_self_dual": search.weakly_self_dual}),
                ));
            };
            let (f, omega) = conclusive_from_isomorphism(&a, &a, &wh)?;
            let id = Matrix::identity(a.dim());
            let v = verify_conclusive(&a, &a, &f, &omega, &id, &id)?;
            let certs = json!({
                "f": codec::vector(&f),
                "omega": codec::matrix(omega.matrix()),
                "omega_hat": codec::matrix(&wh),
                "tau": codec::matrix(&id),
                "eta": codec::matrix(&id),
                "success": codec::vector(&v.success),
            });
            Ok(ctx.report::<S>(
                "teleport",
                inputs,
                if v.verified { "verified" } else { "failed" },
                certs,
            ))
        }
        TeleportMode::Necessity => {
            inputs["mode"] = json!("necessity");
            let wsd = is_weakly_self_dual(&a, budget)?;
            let r = weak_self_duality_necessity(&a, budget)?;
            let mut certs = json!({
                "weakly_self_dual": r.weakly_self_dual,
                "protocol_found": r.protocol_found,
                "candidates": r.candidates,
                "consistent": r.consistent(),
            });
            if let Some(t) = &wsd.isomorphism {
                certs["isomorphism"] = codec::matrix(t);
            }
            if let Some(w) = &r.witness {
                certs["witness"] = codec::matrix(w);
            }
            let verdict = if r.consistent() { "consistent" } else { "inconsistent" };
            Ok(ctx.report::<S>("teleport", inputs, verdict, certs))
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
}
