//! Bit commitment without entanglement: Alice commits to a bit by sending a
//! product of pure states sampled from one of two decompositions of the same
//! mixed state, and reveals the bit with the list of sampled indices; Bob
//! checks every subsystem with the exposing effect of the claimed state.

use std::cmp::Ordering;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GptError, Result};
use crate::geometry::linalg::{dot, greedy_basis, kron, rank_of, Matrix, Vector};
use crate::geometry::lp::{LinearProgram, LpOutcome};
use crate::geometry::scalar::Scalar;
use crate::statespace::{Effect, Observable, StateSpace};

/// An effect that equals 1 exactly on one vertex; `gap` bounds `1 - a(v)`
/// from below on every other vertex `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exposure<S: Scalar> {
    pub effect: Effect<S>,
    pub gap: S,
}

/// The largest-gap exposing effect of vertex `index` of the state polytope.
pub fn exposing_effect<S: Scalar>(space: &StateSpace<S>, index: usize) -> Result<Exposure<S>> {
    let verts = space.omega_vertices();
    if index >= verts.len() {
        return Err(GptError::InvalidInput(format!("no vertex {index}")));
    }
    let d = space.dim();
    // variables: a (d entries), delta
    let mut lp = LinearProgram::free(d + 1);
    let with = |v: &[S], delta: S| -> Vector<S> {
        let mut row = v.to_vec();
        row.push(delta);
        row
    };
    lp.eq(with(&verts[index], S::zero()), S::one());
    for (k, v) in verts.iter().enumerate() {
        lp.ge(with(v, S::zero()), S::zero());
        if k != index {
            lp.le(with(v, S::one()), S::one());
        }
    }
    let mut obj = vec![S::zero(); d];
    obj.push(S::one());
    lp.maximize(obj);
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let gap = x[d].clone();
            if !gap.is_pos() {
                return Err(GptError::NotExposed(index));
            }
            Ok(Exposure {
                effect: Effect(x[..d].to_vec()),
                gap,
            })
        }
        // a single vertex: every vertex is exposed by the unit with the maximal gap 1
        LpOutcome::Unbounded if verts.len() == 1 => Ok(Exposure {
            effect: Effect(space.unit().to_vec()),
            gap: S::one(),
        }),
        other => Err(GptError::Degenerate(format!("exposing-effect program: {other:?}"))),
    }
}

/// One term `p * mu` of a decomposition, with the exposing effect of `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<S: Scalar> {
    pub prob: S,
    /// index into the space's state-polytope vertices
    pub vertex: usize,
    pub state: Vector<S>,
    pub exposer: Exposure<S>,
}

#[derive(Clone, Debug)]
pub struct CommitmentScheme<S: Scalar> {
    pub space: StateSpace<S>,
    pub omega: Vector<S>,
    /// `decomps[b]` is the decomposition used to commit to bit `b`.
    pub decomps: [Vec<Component<S>>; 2],
}

fn bit_index(b: u8) -> Result<usize> {
    match b {
        0 | 1 => Ok(b as usize),
        _ => Err(GptError::InvalidInput(format!("bit must be 0 or 1, got {b}"))),
    }
}

impl<S: Scalar> CommitmentScheme<S> {
    /// Builds a scheme from two weighted vertex lists, computing the
    /// exposing effects, and checks every invariant.
    pub fn from_decompositions(space: &StateSpace<S>, decomp0: &[(S, usize)], decomp1: &[(S, usize)]) -> Result<Self> {
        let build = |list: &[(S, usize)]| -> Result<Vec<Component<S>>> {
            list.iter()
                .map(|(p, i)| {
                    let state = space
                        .omega_vertices()
                        .get(*i)
                        .ok_or_else(|| GptError::InvalidInput(format!("no vertex {i}")))?
                        .clone();
                    Ok(Component {
                        prob: p.clone(),
                        vertex: *i,
                        state,
                        exposer: exposing_effect(space, *i)?,
                    })
                })
                .collect()
        };
        let mut omega = vec![S::zero(); space.dim()];
        for (p, i) in decomp0 {
            if let Some(v) = space.omega_vertices().get(*i) {
                for (o, x) in omega.iter_mut().zip(v) {
                    *o += p.clone() * x.clone();
                }
            }
        }
        let scheme = CommitmentScheme {
            space: space.clone(),
            omega,
            decomps: [build(decomp0)?, build(decomp1)?],
        };
        scheme.check()?;
        Ok(scheme)
    }

    /// `N_0 + N_1`.
    pub fn total_size(&self) -> usize {
        self.decomps[0].len() + self.decomps[1].len()
    }

    /// Both decompositions sum to `omega` with positive weights adding to 1,
    /// the two vertex sets are disjoint, and each exposer is an effect that
    /// takes value 1 on its own vertex and less than 1 on all others.
    pub fn check(&self) -> Result<()> {
        let space = &self.space;
        for (b, dec) in self.decomps.iter().enumerate() {
            if dec.is_empty() {
                return Err(GptError::InvalidInput(format!("decomposition {b} is empty")));
            }
            let mut total = S::zero();
            let mut mix = vec![S::zero(); space.dim()];
            for c in dec {
                if !c.prob.is_pos() {
                    return Err(GptError::InvalidInput(format!("decomposition {b}: nonpositive weight")));
                }
                total += c.prob.clone();
                for (m, x) in mix.iter_mut().zip(&c.state) {
                    *m += c.prob.clone() * x.clone();
                }
                let a = &c.exposer.effect;
                if !crate::statespace::is_effect(space, &a.0) {
                    return Err(GptError::InvalidEffect(format!("exposer of vertex {}", c.vertex)));
                }
                for (k, v) in space.omega_vertices().iter().enumerate() {
                    let p = a.prob(v);
                    let ok = if k == c.vertex {
                        (p - S::one()).is_zero()
                    } else {
                        (S::one() - p).is_pos()
                    };
                    if !ok {
                        return Err(GptError::InvalidEffect(format!(
                            "effect for vertex {} does not expose it (vertex {k})",
                            c.vertex
                        )));
                    }
                }
            }
            if !(total - S::one()).is_zero() {
                return Err(GptError::InvalidInput(format!(
                    "decomposition {b}: weights do not sum to 1"
                )));
            }
            if !crate::geometry::linalg::vec_eq(&mix, &self.omega) {
                return Err(GptError::InvalidState(format!(
                    "decomposition {b} does not average to omega"
                )));
            }
        }
        if self.decomps[0]
            .iter()
            .any(|c| self.decomps[1].iter().any(|d| d.vertex == c.vertex))
        {
            return Err(GptError::InvalidInput("decompositions share a state".into()));
        }
        Ok(())
    }

    /// Bob's two-outcome test for index `i` of bit `b`: the exposing effect
    /// and its complement.
    pub fn bob_observable(&self, b: u8, i: usize) -> Result<Observable<S>> {
        let c = self.decomps[bit_index(b)?]
            .get(i)
            .ok_or_else(|| GptError::InvalidInput(format!("no index {i}")))?;
        let a = c.exposer.effect.clone();
        let comp = a.complement(&self.space);
        Ok(Observable { effects: vec![a, comp] })
    }
}

/// Minimal linearly dependent vertex subsets split the subset into the
/// positive and negative parts of the dependence; both parts average to the
/// same state. Returns `None` for a simplex. With `minimize`, subsets are
/// searched by size so the scheme with the fewest states is returned
/// (ties broken lexicographically); otherwise the circuit of the first
/// vertex outside a greedy basis is used.
pub fn find_double_decomposition<S: Scalar>(
    space: &StateSpace<S>,
    minimize: bool,
) -> Result<Option<CommitmentScheme<S>>> {
    let verts = space.omega_vertices();
    let d = space.dim();
    if space.is_simplex() {
        return Ok(None);
    }
    let circuit = if minimize {
        smallest_circuit(verts, d)
    } else {
        let basis = greedy_basis(d, verts);
        let extra = (0..verts.len())
            .find(|i| !basis.contains(i))
            .expect("a non-simplex has a dependent vertex");
        let bm = Matrix::from_cols(d, &basis.iter().map(|&i| verts[i].clone()).collect::<Vec<_>>())?;
        let coords = bm.inverse().ok_or(GptError::NotGenerating)?.apply(&verts[extra]);
        let mut idx: Vec<usize> = basis
            .iter()
            .zip(&coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&i, _)| i)
            .collect();
        idx.push(extra);
        idx.sort_unstable();
        Some(idx)
    };
    let Some(idx) = circuit else {
        return Ok(None);
    };
    let pts: Vec<Vector<S>> = idx.iter().map(|&i| verts[i].clone()).collect();
    let null = Matrix::from_cols(d, &pts)?.nullspace();
    let mut c = null
        .into_iter()
        .next()
        .ok_or_else(|| GptError::Degenerate("circuit without dependence".into()))?;
    if c[0].is_neg() {
        c.iter_mut().for_each(|x| *x = -x.clone());
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&i, x) in idx.iter().zip(&c) {
        if x.is_pos() {
            pos.push((x.clone(), i));
        } else if x.is_neg() {
            neg.push((-x.clone(), i));
        }
    }
    let normalize = |list: Vec<(S, usize)>| -> Vec<(S, usize)> {
        let total = list.iter().fold(S::zero(), |acc, (p, _)| acc + p.clone());
        list.into_iter().map(|(p, i)| (p / total.clone(), i)).collect()
    };
    CommitmentScheme::from_decompositions(space, &normalize(pos), &normalize(neg)).map(Some)
}

fn smallest_circuit<S: Scalar>(verts: &[Vector<S>], d: usize) -> Option<Vec<usize>> {
    let n = verts.len();
    for k in 2..=(d + 1).min(n) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let pts: Vec<Vector<S>> = idx.iter().map(|&i| verts[i].clone()).collect();
            if rank_of(d, &pts) == k - 1 {
                let null = Matrix::from_cols(d, &pts).ok()?.nullspace();
                if null.len() == 1 && null[0].iter().all(|x| !x.is_zero()) {
                    return Some(idx);
                }
            }
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

/// A product state over the minimal tensor product, one factor per subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState<S: Scalar> {
    pub factors: Vec<Vector<S>>,
}

impl<S: Scalar> ProductState<S> {
    pub fn to_tensor(&self) -> Vector<S> {
        self.factors.iter().fold(vec![S::one()], |acc, f| kron(&acc, f))
    }

    /// Probability of the product effect `a_1 (x) ... (x) a_n`.
    pub fn prob(&self, effects: &[Vector<S>]) -> S {
        self.factors
            .iter()
            .zip(effects)
            .fold(S::one(), |acc, (f, a)| acc * dot(a, f))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript<S> {
    pub committed: u8,
    pub revealed: u8,
    /// sampled indices into the committed decomposition
    pub sent: Vec<usize>,
    /// indices Alice claims in the reveal
    pub claimed: Vec<usize>,
    /// exact acceptance probability per subsystem
    pub subsystem_probs: Vec<S>,
    pub outcomes: Vec<bool>,
    pub accept: bool,
}

fn sample_indices<S: Scalar>(dec: &[Component<S>], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let weights: Vec<f64> = dec.iter().map(|c| c.prob.to_f64()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| GptError::InvalidInput(format!("weights: {e}")))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

fn simulate<S: Scalar>(
    scheme: &CommitmentScheme<S>,
    committed: u8,
    revealed: u8,
    n: usize,
    seed: u64,
) -> Result<Transcript<S>> {
    if n == 0 {
        return Err(GptError::InvalidInput("n must be at least 1".into()));
    }
    let (cb, rb) = (bit_index(committed)?, bit_index(revealed)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sent = sample_indices(&scheme.decomps[cb], n, &mut rng)?;
    let product = ProductState {
        factors: sent.iter().map(|&i| scheme.decomps[cb][i].state.clone()).collect(),
    };
    // an honest reveal repeats the string; a dishonest one claims, per
    // subsystem, the index of the other decomposition most likely to pass
    let claimed: Vec<usize> = if cb == rb {
        sent.clone()
    } else {
        product
            .factors
            .iter()
            .map(|f| {
                let dec = &scheme.decomps[rb];
                (0..dec.len())
                    .max_by(|&i, &j| {
                        dec[i]
                            .exposer
                            .effect
                            .prob(f)
                            .cmp_tol(&dec[j].exposer.effect.prob(f))
                            .then(j.cmp(&i))
                    })
                    .unwrap_or(0)
            })
            .collect()
    };
    let effects: Vec<Vector<S>> = claimed
        .iter()
        .map(|&i| scheme.decomps[rb][i].exposer.effect.0.clone())
        .collect();
    let subsystem_probs: Vec<S> = product.factors.iter().zip(&effects).map(|(f, a)| dot(a, f)).collect();
    let outcomes: Vec<bool> = subsystem_probs
        .iter()
        .map(|p| {
            if (p.clone() - S::one()).is_zero() {
                // drawn anyway so the stream does not depend on the verdict
                let _: f64 = rng.random();
                true
            } else {
                rng.random::<f64>() < p.to_f64()
            }
        })
        .collect();
    let accept = outcomes.iter().all(|&o| o);
    Ok(Transcript {
        committed,
        revealed,
        sent,
        claimed,
        subsystem_probs,
        outcomes,
        accept,
    })
}

/// Honest commit to `b` followed by an honest reveal.
pub fn run_honest<S: Scalar>(scheme: &CommitmentScheme<S>, b: u8, n: usize, seed: u64) -> Result<Transcript<S>> {
    simulate(scheme, b, b, n, seed)
}

/// Commit with the states of `committed`, then try to reveal `revealed`.
pub fn run_tampered<S: Scalar>(
    scheme: &CommitmentScheme<S>,
    committed: u8,
    revealed: u8,
    n: usize,
    seed: u64,
) -> Result<Transcript<S>> {
    simulate(scheme, committed, revealed, n, seed)
}

/// Outcome of [`hiding_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct Hiding<S> {
    pub n: usize,
    pub equal: bool,
    /// first tensor coordinate where the two committed mixtures differ,
    /// with the values for bit 0 and bit 1
    pub first_difference: Option<(usize, S, S)>,
    /// the common mixture equals `omega^(x)n`
    pub matches_omega: bool,
}

/// Upper bound on `terms * tensor dimension` for the literal expansion.
pub const HIDING_WORK_LIMIT: usize = 50_000_000;

/// Expands both `n`-fold committed mixtures term by term (one product state
/// per index string) and compares them entrywise.
pub fn hiding_check<S: Scalar>(scheme: &CommitmentScheme<S>, n: usize) -> Result<Hiding<S>> {
    if n == 0 {
        return Err(GptError::InvalidInput("n must be at least 1".into()));
    }
    let dim = scheme.space.dim();
    let tensor_dim = dim.checked_pow(n as u32).unwrap_or(usize::MAX);
    let mut mixtures = Vec::with_capacity(2);
    for dec in &scheme.decomps {
        let terms = dec.len().checked_pow(n as u32).unwrap_or(usize::MAX);
        if terms.saturating_mul(tensor_dim) > HIDING_WORK_LIMIT {
            return Err(GptError::SearchBudgetExceeded(format!(
                "{terms} product terms of dimension {tensor_dim}"
            )));
        }
        let mut acc = vec![S::zero(); tensor_dim];
        let mut idx = vec![0usize; n];
        for _ in 0..terms {
            let mut weight = S::one();
            let mut t = vec![S::one()];
            for &i in &idx {
                weight = weight * dec[i].prob.clone();
                t = kron(&t, &dec[i].state);
            }
            for (a, x) in acc.iter_mut().zip(&t) {
                *a += weight.clone() * x.clone();
            }
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < dec.len() {
                    break;
                }
                *slot = 0;
            }
        }
        mixtures.push(acc);
    }
    let first_difference = mixtures[0]
        .iter()
        .zip(&mixtures[1])
        .position(|(x, y)| !(x.clone() - y.clone()).is_zero())
        .map(|k| (k, mixtures[0][k].clone(), mixtures[1][k].clone()));
    let omega_n = (0..n).fold(vec![S::one()], |acc, _| kron(&acc, &scheme.omega));
    let matches_omega = crate::geometry::linalg::vec_eq(&mixtures[0], &omega_n);
    Ok(Hiding {
        n,
        equal: first_difference.is_none(),
        first_difference,
        matches_omega,
    })
}

/// Alice's best product-state attack on `n` subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding<S> {
    pub n: usize,
    /// `max (P_0 + P_1 - 1)`, where `P_b` is the probability that revealing
    /// `b` is accepted; 0 for a perfectly binding scheme
    pub probability: S,
    /// `(P_0, P_1)` at the optimum
    pub reveal: (S, S),
}

/// Per-subsystem pairs `(max_i a^0_i(v), max_j a^1_j(v))` over vertices `v`,
/// with dominated pairs removed.
pub fn reveal_pairs<S: Scalar>(scheme: &CommitmentScheme<S>) -> Vec<(S, S)> {
    let best = |dec: &[Component<S>], v: &[S]| -> S {
        dec.iter()
            .map(|c| c.exposer.effect.prob(v))
            .fold(S::zero(), |m, p| m.max_tol(p))
    };
    let pairs = scheme
        .space
        .omega_vertices()
        .iter()
        .map(|v| (best(&scheme.decomps[0], v), best(&scheme.decomps[1], v)))
        .collect();
    pareto(pairs)
}

fn pareto<S: Scalar>(mut pairs: Vec<(S, S)>) -> Vec<(S, S)> {
    pairs.sort_by(|a, b| b.0.cmp_tol(&a.0).then(b.1.cmp_tol(&a.1)));
    let mut out: Vec<(S, S)> = Vec::new();
    for p in pairs {
        if out.last().is_none_or(|q| p.1.cmp_tol(&q.1) == Ordering::Greater) {
            out.push(p);
        }
    }
    out
}

/// Alice prepares an arbitrary product state `s_1 (x) ... (x) s_n` and
/// afterwards reveals whichever bit she likes, claiming for each subsystem
/// the index whose exposer is most likely to fire. Then
/// `P_b = prod_k max_i a^b_i(s_k)`. The per-subsystem objective is convex
/// in `s_k`, so the optimum is attained with every `s_k` a vertex; the
/// search keeps the Pareto front of `(P_0, P_1)` over vertex strings.
pub fn cheat_binding<S: Scalar>(scheme: &CommitmentScheme<S>, n: usize) -> Result<Binding<S>> {
    if n == 0 {
        return Err(GptError::InvalidInput("n must be at least 1".into()));
    }
    let pairs = reveal_pairs(scheme);
    let mut front = vec![(S::one(), S::one())];
    for _ in 0..n {
        let next = front
            .iter()
            .flat_map(|(f, g)| {
                pairs
                    .iter()
                    .map(move |(a, b)| (f.clone() * a.clone(), g.clone() * b.clone()))
            })
            .collect();
        front = pareto(next);
    }
    let (p0, p1) = front
        .into_iter()
        .max_by(|x, y| (x.0.clone() + x.1.clone()).cmp_tol(&(y.0.clone() + y.1.clone())))
        .expect("front is never empty");
    Ok(Binding {
        n,
        probability: p0.clone() + p1.clone() - S::one(),
        reveal: (p0, p1),
    })
}

/// `max_s min_b max_i a^b_i(s)` over normalized states: the best
/// acceptance probability Alice can guarantee for both bits at once on a
/// single subsystem. Solved as one LP per pair of exposers.
pub fn symmetric_cheat_value<S: Scalar>(scheme: &CommitmentScheme<S>) -> Result<S> {
    let verts = scheme.space.omega_vertices();
    let k = verts.len();
    let mut best = S::zero();
    for c0 in &scheme.decomps[0] {
        for c1 in &scheme.decomps[1] {
            // variables: convex weights over vertices, t
            let mut lp = LinearProgram::nonneg(k + 1);
            let mut ones = vec![S::one(); k];
            ones.push(S::zero());
            lp.eq(ones, S::one());
            for a in [&c0.exposer.effect, &c1.exposer.effect] {
                let mut row: Vector<S> = verts.iter().map(|v| a.prob(v)).collect();
                row.push(-S::one());
                lp.ge(row, S::zero());
            }
            let mut obj = vec![S::zero(); k];
            obj.push(S::one());
            lp.maximize(obj);
            if let LpOutcome::Optimal { x, .. } = lp.solve()? {
                best = best.max_tol(x[k].clone());
            }
        }
    }
    Ok(best)
}
