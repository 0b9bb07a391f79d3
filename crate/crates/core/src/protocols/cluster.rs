//! Cluster-chain construction, stabilizer verification, chain fusion and
//! single-qubit removal.
//!
//! A chain of length `n` is the graph state of the path `0-1-..-(n-1)`:
//! every qubit in `(|0>+|1>)/sqrt2` and a conditional phase flip on each
//! edge, equivalently the closed form with amplitude
//! `2^{-n/2} (-1)^{sum_i b_i b_{i+1}}` on the bit string `b`. Chains here
//! are built by the photon-mediated pairwise-then-merge procedure, so the
//! construction path is independent of the closed form used to verify it.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qsim::{Basis, Gate, StateVector};

use super::{ensemble_cpf, Detection, Pauli, ProtocolOutcome};

/// Closed-form chain state: `2^{-n/2} (-1)^{sum b_i b_{i+1}}` amplitudes.
pub fn cluster_chain_closed_form(n: usize) -> Result<StateVector> {
    if !(2..=22).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "chain length must be in [2, 22], got {n}"
        )));
    }
    let total = 1usize << n;
    let scale = (total as f64).sqrt().recip();
    let mut amps = Vec::with_capacity(total);
    for idx in 0..total {
        let mut sign = 1.0;
        for i in 0..n - 1 {
            if (idx >> i) & 1 == 1 && (idx >> (i + 1)) & 1 == 1 {
                sign = -sign;
            }
        }
        amps.push(Complex64::new(sign * scale, 0.0));
    }
    StateVector::from_amplitudes(&vec![2; n], amps)
}

/// Build the `n`-qubit chain by the divide-and-merge procedure: prepare all
/// qubits in `(|0>+|1>)/sqrt2`, recursively build both halves, then link
/// them with a photon-mediated conditional phase flip across the junction.
/// Detection outcomes are sampled from `rng`; the classical corrections
/// make the result outcome-independent.
pub fn build_cluster_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "chain length must be in [2, 16], got {n}"
        )));
    }
    let mut state = StateVector::plus_qubits(n)?;
    fn merge<R: Rng + ?Sized>(
        state: StateVector,
        lo: usize,
        hi: usize,
        rng: &mut R,
    ) -> Result<StateVector> {
        if hi - lo < 2 {
            return Ok(state);
        }
        let mid = lo + (hi - lo + 1) / 2;
        let state = merge(state, lo, mid, rng)?;
        let state = merge(state, mid, hi, rng)?;
        Ok(ensemble_cpf(&state, mid - 1, mid, rng)?.state)
    }
    state = merge(state, 0, n, rng)?;
    Ok(state)
}

/// [`build_cluster_chain`] with a fixed seed.
pub fn build_cluster_chain_seeded(n: usize, seed: u64) -> Result<StateVector> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    build_cluster_chain(n, &mut rng)
}

/// Expectation value of a product of single-qubit Paulis.
pub fn pauli_string_expectation(state: &StateVector, ops: &[(usize, Pauli)]) -> Result<f64> {
    let mut transformed = state.clone();
    for &(site, pauli) in ops {
        let gate = match pauli {
            Pauli::I => continue,
            Pauli::X => Gate::x(),
            Pauli::Y => Gate::y(),
            Pauli::Z => Gate::z(),
        };
        transformed = transformed.apply(&gate, &[site])?;
    }
    let val = state.inner(&transformed)?;
    debug_assert!(val.im.abs() < 1e-10);
    Ok(val.re)
}

/// Stabilizer `X_i Z_{i-1} Z_{i+1}` of a chain laid out along `order`;
/// neighbors outside the path are omitted.
fn path_stabilizer(order: &[usize], k: usize) -> Vec<(usize, Pauli)> {
    let mut ops = vec![(order[k], Pauli::X)];
    if k > 0 {
        ops.push((order[k - 1], Pauli::Z));
    }
    if k + 1 < order.len() {
        ops.push((order[k + 1], Pauli::Z));
    }
    ops
}

/// All chain stabilizer expectations `<X_i Z_{i-1} Z_{i+1}>` for a state
/// whose sites form a chain in index order.
pub fn chain_stabilizer_expectations(state: &StateVector) -> Result<Vec<f64>> {
    let order: Vec<usize> = (0..state.n_sites()).collect();
    (0..order.len())
        .map(|k| pauli_string_expectation(state, &path_stabilizer(&order, k)))
        .collect()
}

/// Stabilizer expectations for a chain laid out along an explicit site order.
pub fn path_stabilizer_expectations(state: &StateVector, order: &[usize]) -> Result<Vec<f64>> {
    (0..order.len())
        .map(|k| pauli_string_expectation(state, &path_stabilizer(order, k)))
        .collect()
}

/// Fuse two chains with a photon-mediated conditional phase flip between an
/// end qubit `qa` of `a` and an end qubit `qb` of `b`. The returned state
/// holds `a`'s sites followed by `b`'s.
pub fn fuse_chains<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    qa: usize,
    qb: usize,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    let end_of = |len: usize, q: usize| q == 0 || q + 1 == len;
    if !end_of(a.n_sites(), qa) || !end_of(b.n_sites(), qb) {
        return Err(Error::InvalidParameter(format!(
            "fusion targets must be end qubits; got {qa} of {} and {qb} of {}",
            a.n_sites(),
            b.n_sites()
        )));
    }
    let joint = a.tensor(b)?;
    ensemble_cpf(&joint, qa, a.n_sites() + qb, rng)
}

/// Local (single-qubit Clifford) correction used by the removal protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalCorrection {
    PauliX(usize),
    PauliZ(usize),
    Hadamard(usize),
}

/// Result of removing one qubit from a chain.
#[derive(Clone, Debug)]
pub struct RemovalOutcome {
    /// State with the measured site dropped (original site `j > i` becomes
    /// `j - 1`).
    pub state: StateVector,
    /// Site order (in the reduced indexing) along which `state` is a chain.
    pub chain_order: Vec<usize>,
    /// Reduced index of a neighbor left collapsed in the computational
    /// basis when an end qubit is removed from a chain of length >= 3.
    pub byproduct: Option<usize>,
    pub detection: Detection,
    /// Corrections applied, in original (pre-drop) site indices.
    pub corrections: Vec<LocalCorrection>,
}

/// Removal plan: measured site's corrections per outcome plus the new
/// chain layout.
struct RemovalPlan {
    plus: Vec<LocalCorrection>,
    minus: Vec<LocalCorrection>,
    chain_order: Vec<usize>,
    byproduct: Option<usize>,
}

fn removal_plan(n: usize, i: usize) -> Result<RemovalPlan> {
    use LocalCorrection::*;
    // reduced index of original site j (valid for j != i)
    let red = |j: usize| if j > i { j - 1 } else { j };
    if n == 2 {
        let r = 1 - i;
        return Ok(RemovalPlan {
            plus: vec![Hadamard(r)],
            minus: vec![Hadamard(r), PauliZ(r)],
            chain_order: vec![0],
            byproduct: None,
        });
    }
    if i == 0 || i == n - 1 {
        // the near neighbor collapses; the second neighbor takes a
        // conditional phase fix
        let (near, far) = if i == 0 { (1, 2) } else { (n - 2, n - 3) };
        let chain: Vec<usize> = (0..n)
            .filter(|&j| j != i && j != near)
            .map(red)
            .collect();
        return Ok(RemovalPlan {
            plus: vec![],
            minus: vec![PauliZ(far)],
            chain_order: chain,
            byproduct: Some(red(near)),
        });
    }
    if i == 1 {
        // chain re-threads through the removed site's right neighbor:
        // 2 - 0 - 3 - 4 - ..
        let mut order = vec![red(2), red(0)];
        order.extend((3..n).map(red));
        return Ok(RemovalPlan {
            plus: vec![Hadamard(2)],
            minus: vec![Hadamard(2), PauliX(0)],
            chain_order: order,
            byproduct: None,
        });
    }
    if i == n - 2 {
        // mirror of the i == 1 case
        let mut order: Vec<usize> = (0..=n - 4).map(red).collect();
        order.push(red(n - 1));
        order.push(red(n - 3));
        return Ok(RemovalPlan {
            plus: vec![Hadamard(n - 3)],
            minus: vec![Hadamard(n - 3), PauliX(n - 1)],
            chain_order: order,
            byproduct: None,
        });
    }
    Err(Error::UnsupportedRemoval(format!(
        "an X measurement on interior site {i} of an {n}-chain leaves a degree-3 \
         junction (a GHZ-class graph), not a chain; supported positions are the \
         ends and the end-adjacent sites"
    )))
}

fn apply_local(state: &StateVector, corrections: &[LocalCorrection]) -> Result<StateVector> {
    let mut s = state.clone();
    for c in corrections {
        s = match *c {
            LocalCorrection::PauliX(q) => s.apply(&Gate::x(), &[q])?,
            LocalCorrection::PauliZ(q) => s.apply(&Gate::z(), &[q])?,
            LocalCorrection::Hadamard(q) => s.apply(&Gate::hadamard(), &[q])?,
        };
    }
    Ok(s)
}

fn removal_outcome(
    rec: &crate::qsim::MeasurementRecord,
    plan: &RemovalPlan,
    i: usize,
) -> Result<RemovalOutcome> {
    let corrections = if rec.outcome == 0 {
        plan.plus.clone()
    } else {
        plan.minus.clone()
    };
    let corrected = apply_local(&rec.state, &corrections)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vec = vec![
        Complex64::new(s, 0.0),
        Complex64::new(if rec.outcome == 0 { s } else { -s }, 0.0),
    ];
    let reduced = corrected.project_out_site(i, &vec)?;
    Ok(RemovalOutcome {
        state: reduced,
        chain_order: plan.chain_order.clone(),
        byproduct: plan.byproduct,
        detection: Detection {
            site: i,
            basis: "diagonal",
            outcome: rec.outcome,
            label: if rec.outcome == 0 { "+" } else { "-" }.to_string(),
            probability: rec.probability,
        },
        corrections,
    })
}

/// Remove qubit `i` from a chain state with an X measurement and an
/// outcome-dependent local correction, leaving a shorter chain (layout in
/// the returned `chain_order`). End removals from chains of length >= 3
/// also detach the measured qubit's neighbor, which is left collapsed and
/// reported as `byproduct`.
pub fn remove_qubit<R: Rng + ?Sized>(
    state: &StateVector,
    i: usize,
    rng: &mut R,
) -> Result<RemovalOutcome> {
    let n = state.n_sites();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "removal needs a chain of at least two qubits".into(),
        ));
    }
    if i >= n {
        return Err(Error::SiteOutOfRange { site: i, n_sites: n });
    }
    let plan = removal_plan(n, i)?;
    let rec = state.measure(i, &Basis::Diagonal, rng)?;
    removal_outcome(&rec, &plan, i)
}

/// Exhaustive variant of [`remove_qubit`]: both X outcomes.
pub fn remove_qubit_branches(state: &StateVector, i: usize) -> Result<Vec<RemovalOutcome>> {
    let n = state.n_sites();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "removal needs a chain of at least two qubits".into(),
        ));
    }
    if i >= n {
        return Err(Error::SiteOutOfRange { site: i, n_sites: n });
    }
    let plan = removal_plan(n, i)?;
    state
        .measure_branches(i, &Basis::Diagonal)?
        .iter()
        .map(|rec| removal_outcome(rec, &plan, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Reference state for a removal outcome: a path graph state along
    /// `order`, with any byproduct site collapsed to the detected level.
    fn expected_after_removal(
        n_reduced: usize,
        order: &[usize],
        byproduct: Option<usize>,
        outcome: usize,
    ) -> StateVector {
        let mut s = StateVector::plus_qubits(n_reduced).unwrap();
        if let Some(b) = byproduct {
            // collapse the byproduct: project |+> onto |outcome>, i.e. start
            // it in the computational level instead
            let mut levels = vec![0usize; n_reduced];
            levels[b] = outcome;
            let mut fresh = Vec::new();
            for q in 0..n_reduced {
                fresh.push(q);
            }
            let _ = fresh;
            s = {
                let mut parts: Vec<StateVector> = Vec::new();
                for q in 0..n_reduced {
                    if q == b {
                        parts.push(StateVector::qubit(outcome));
                    } else {
                        parts.push(StateVector::plus());
                    }
                }
                let mut acc = parts[0].clone();
                for p in &parts[1..] {
                    acc = acc.tensor(p).unwrap();
                }
                acc
            };
        }
        for w in order.windows(2) {
            s = s.apply(&Gate::cpf_ensembles(), &[w[0], w[1]]).unwrap();
        }
        s
    }

    #[test]
    fn closed_form_matches_gate_construction() {
        for n in 2..=6 {
            let mut s = StateVector::plus_qubits(n).unwrap();
            for i in 0..n - 1 {
                s = s.apply(&Gate::cpf_ensembles(), &[i, i + 1]).unwrap();
            }
            let closed = cluster_chain_closed_form(n).unwrap();
            assert!((s.fidelity(&closed).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn built_chain_matches_closed_form_and_stabilizers() {
        for n in 2..=8 {
            let state = build_cluster_chain_seeded(n, 0xA0 + n as u64).unwrap();
            let closed = cluster_chain_closed_form(n).unwrap();
            assert!(
                (state.fidelity(&closed).unwrap() - 1.0).abs() < 1e-10,
                "n = {n}"
            );
            for (k, v) in chain_stabilizer_expectations(&state)
                .unwrap()
                .iter()
                .enumerate()
            {
                assert!((v - 1.0).abs() < 1e-10, "n = {n}, K_{k} = {v}");
            }
        }
    }

    #[test]
    fn two_and_four_chains_match_the_small_closed_forms() {
        // n = 2: amplitudes (1,1,1,-1)/2
        let s2 = build_cluster_chain_seeded(2, 1).unwrap();
        let want2 = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in s2.amps().iter().zip(want2) {
            assert!((a - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
        // n = 4: sign pattern (-1)^{b0 b1 + b1 b2 + b2 b3}
        let s4 = build_cluster_chain_seeded(4, 2).unwrap();
        for idx in 0..16usize {
            let b: Vec<usize> = (0..4).map(|k| (idx >> k) & 1).collect();
            let sign = 1.0
                - 2.0 * (((b[0] * b[1] + b[1] * b[2] + b[2] * b[3]) % 2) as f64);
            assert!((s4.amps()[idx] - Complex64::new(sign * 0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn chain_length_caps_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(build_cluster_chain(1, &mut rng).is_err());
        assert!(build_cluster_chain(17, &mut rng).is_err());
    }

    #[test]
    fn fusing_two_pairs_gives_the_four_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pair = build_cluster_chain(2, &mut rng).unwrap();
        let fused = fuse_chains(&pair, &pair, 1, 0, &mut rng).unwrap();
        let want = cluster_chain_closed_form(4).unwrap();
        assert!((fused.state.fidelity(&want).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fusing_single_plus_qubits_gives_the_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let one = StateVector::plus();
        let fused = fuse_chains(&one, &one, 0, 0, &mut rng).unwrap();
        let want = cluster_chain_closed_form(2).unwrap();
        assert!((fused.state.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fusion_requires_end_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chain = cluster_chain_closed_form(3).unwrap();
        assert!(fuse_chains(&chain, &chain, 1, 0, &mut rng).is_err());
    }

    #[test]
    fn fuse_then_remove_shortens_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pair = cluster_chain_closed_form(2).unwrap();
        let fused = fuse_chains(&pair, &pair, 1, 0, &mut rng).unwrap().state;
        let removed = remove_qubit(&fused, 3, &mut rng).unwrap();
        // end removal of qubit 3 detaches qubit 2 and leaves the 2-chain
        let exps =
            path_stabilizer_expectations(&removed.state, &removed.chain_order).unwrap();
        assert_eq!(removed.chain_order.len(), 2);
        for v in exps {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn removal_of_middle_qubit_in_three_chain() {
        let chain = cluster_chain_closed_form(3).unwrap();
        let branches = remove_qubit_branches(&chain, 1).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!((b.detection.probability - 0.5).abs() < 1e-12);
            let want = expected_after_removal(2, &b.chain_order, None, b.detection.outcome);
            assert!(
                (b.state.fidelity(&want).unwrap() - 1.0).abs() < 1e-10,
                "outcome {}",
                b.detection.outcome
            );
        }
    }

    #[test]
    fn removal_branches_agree_after_correction() {
        // both X outcomes give the same stabilizer group after correction
        for (n, i) in [(3, 1), (4, 1), (4, 2), (5, 1), (5, 3), (5, 4), (6, 1), (6, 4)] {
            let chain = cluster_chain_closed_form(n).unwrap();
            let branches = remove_qubit_branches(&chain, i).unwrap();
            for b in &branches {
                let exps =
                    path_stabilizer_expectations(&b.state, &b.chain_order).unwrap();
                for (k, v) in exps.iter().enumerate() {
                    assert!(
                        (v - 1.0).abs() < 1e-10,
                        "n={n} i={i} outcome={} K_{k}={v}",
                        b.detection.outcome
                    );
                }
                let want = expected_after_removal(
                    n - 1,
                    &b.chain_order,
                    b.byproduct,
                    b.detection.outcome,
                );
                assert!(
                    (b.state.fidelity(&want).unwrap() - 1.0).abs() < 1e-10,
                    "n={n} i={i} outcome={}",
                    b.detection.outcome
                );
            }
        }
    }

    #[test]
    fn removal_from_pair_leaves_single_plus() {
        let chain = cluster_chain_closed_form(2).unwrap();
        for b in remove_qubit_branches(&chain, 1).unwrap() {
            assert!((b.state.fidelity(&StateVector::plus()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deep_interior_removal_is_rejected() {
        let chain = cluster_chain_closed_form(6).unwrap();
        assert!(matches!(
            remove_qubit_branches(&chain, 3),
            Err(Error::UnsupportedRemoval(_))
        ));
    }

    #[test]
    fn stabilizers_detect_a_broken_chain() {
        // sanity check of the verifier itself
        let mut bad = cluster_chain_closed_form(3).unwrap();
        bad = bad.apply(&Gate::z(), &[1]).unwrap();
        let exps = chain_stabilizer_expectations(&bad).unwrap();
        assert!(exps.iter().any(|v| (v - 1.0).abs() > 0.5));
    }
}
