//! The acceptance gate: twelve checks, one per headline claim, each
//! asserting the shipped tolerances and printing one PASS line with the
//! measured numbers (visible under `--nocapture`). Every check is seeded,
//! so reruns measure identical values.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tomosim::hardness::{
    assouad_decode_experiment, empirical_kappa, hamming_separation_margin,
    pauli_lowerbound_certificate, pauli_top_weight_basis, sample_instance, weight_threshold,
    HardnessParams,
};
use tomosim::harness::{
    csv_string, run_sweep, state_factory, EstimatorKind, ExperimentConfig, StateKind, StateSpec,
};
use tomosim::linalg::{trace_distance, ComplexMatrix, DensityMatrix};
use tomosim::measurement::{
    mic_apply, mic_quadratic_form, mic_trace_norm, pauli_mic_eigenvalue, random_povm,
    uniform_ensemble_eigenvalue, Povm,
};
use tomosim::pauli::{all_settings, enumerate_by_weight, WeightOrder};
use tomosim::sampling::{derive_seed, sample_indices};
use tomosim::tomography::mub::{build_mub, mub_copies_needed, mub_ls_estimate, mub_tomography_run};
use tomosim::tomography::sim::{
    acceptance_factor, is_degenerate, referee, referee_law_bruteforce, round_messages,
    BlockPartition,
};
use tomosim::tomography::{
    pauli_copies_needed, pauli_estimate, pauli_tomography_run, expected_hs_bound,
};

fn hs_random(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    state_factory(&StateSpec::new(StateKind::HsRandom), d, rng).expect("hs-random state")
}

/// Exhaustive check of the basis-measurement channel spectrum: every
/// non-identity observable is an eigenvector with eigenvalue 1 exactly
/// when the setting measures it, 0 otherwise.
#[test]
fn criterion_01_mic_eigenstructure() {
    let mut max_residual = 0.0f64;
    let mut checks = 0u64;
    for n in 1..=3usize {
        let observables = enumerate_by_weight(n, WeightOrder::Ascending).unwrap();
        assert_eq!(observables.len(), 4usize.pow(n as u32) - 1);
        for b in all_settings(n).unwrap() {
            let povm = Povm::from_basis(&b).unwrap();
            for q in &observables {
                let qm = q.matrix_of();
                let out = mic_apply(&povm, &qm).unwrap();
                let lambda = pauli_mic_eigenvalue(&b, q);
                let residual = (out.matrix() - &qm.matrix().scale(lambda)).max_entry_abs();
                max_residual = max_residual.max(residual);
                checks += 1;
            }
        }
    }
    assert!(max_residual < 1e-10, "max residual {max_residual:.3e}");
    println!(
        "PASS criterion 1: MIC eigenstructure, {checks} setting/observable pairs, \
         max residual {max_residual:.3e} < 1e-10"
    );
}

/// Averaging the channel over all settings gives eigenvalue 3^(-w) on a
/// weight-w observable.
#[test]
fn criterion_02_uniform_ensemble_eigenvalue() {
    let mut max_dev = 0.0f64;
    for n in 1..=3usize {
        let d = (1usize << n) as f64;
        let povms: Vec<Povm> = all_settings(n)
            .unwrap()
            .iter()
            .map(|b| Povm::from_basis(b).unwrap())
            .collect();
        for q in enumerate_by_weight(n, WeightOrder::Ascending).unwrap() {
            let qm = q.matrix_of();
            let avg = povms
                .iter()
                .map(|p| mic_quadratic_form(p, &qm).unwrap())
                .sum::<f64>()
                / povms.len() as f64;
            // Tr[Q^2] = d, so the quadratic form reports eigenvalue * d.
            let dev = (avg / d - uniform_ensemble_eigenvalue(&q)).abs();
            max_dev = max_dev.max(dev);
        }
    }
    assert!(max_dev < 1e-10, "max deviation {max_dev:.3e}");
    println!(
        "PASS criterion 2: uniform-ensemble eigenvalue 3^(-w), \
         max deviation {max_dev:.3e} < 1e-10"
    );
}

/// Channel trace norm: exactly d for basis measurements, at most
/// min(k, d) for k-outcome POVMs.
#[test]
fn criterion_03_mic_trace_norm() {
    let mut max_basis_dev = 0.0f64;
    for n in 1..=3usize {
        let d = (1usize << n) as f64;
        for b in all_settings(n).unwrap() {
            let tn = mic_trace_norm(&Povm::from_basis(&b).unwrap());
            max_basis_dev = max_basis_dev.max((tn - d).abs());
        }
        let tn = mic_trace_norm(&Povm::computational(1 << n).unwrap());
        max_basis_dev = max_basis_dev.max((tn - d).abs());
    }
    assert!(max_basis_dev < 1e-8, "basis deviation {max_basis_dev:.3e}");

    let mut rng = ChaCha8Rng::seed_from_u64(0x0303);
    let mut worst_slack = f64::INFINITY;
    let mut tested = 0u32;
    for &d in &[4usize, 8] {
        for &k in &[2usize, 3, 4, 16] {
            for _ in 0..200 {
                let povm = random_povm(d, k, &mut rng).unwrap();
                let cap = k.min(d) as f64;
                let tn = mic_trace_norm(&povm);
                assert!(tn <= cap + 1e-8, "d={d} k={k}: trace norm {tn} over cap {cap}");
                worst_slack = worst_slack.min(cap - tn);
                tested += 1;
            }
        }
    }
    println!(
        "PASS criterion 3: basis trace norm = d within {max_basis_dev:.3e}; \
         {tested} random POVMs under min(k, d) (tightest slack {worst_slack:.3e})"
    );
}

/// The copy-floor certificate: base constant, matching counts by
/// exhaustive enumeration, and the packing-size guarantee.
#[test]
fn criterion_04_lowerbound_certificate() {
    let cert = pauli_lowerbound_certificate(4, 0.01).unwrap();
    assert!(cert.base >= 9.118, "base {}", cert.base);
    assert!((cert.base - 9.118).abs() < 5e-4, "base {} to 4 significant digits", cert.base);

    for n in 1..=4usize {
        let c = pauli_lowerbound_certificate(n, 0.01).unwrap();
        let words = enumerate_by_weight(n, WeightOrder::Ascending).unwrap();
        let g_direct = words.iter().filter(|q| q.weight() >= n - c.w).count() as u64;
        assert_eq!(c.g, g_direct, "g at n={n}");
        let sum_direct =
            (0u32..1 << n).filter(|m| (m.count_ones() as usize) <= c.w).count() as u64;
        assert_eq!(c.sum_matching, sum_direct, "sum_matching at n={n}");
    }
    for n in 1..=8usize {
        let thr = weight_threshold(n).unwrap();
        assert!(thr.g_ge_half_d2, "g(w) < d^2/2 at n={n}");
    }
    println!(
        "PASS criterion 4: base {:.6} >= 9.118; g and matching counts equal enumeration \
         at N <= 4; g >= d^2/2 for N in 1..=8",
        cert.base
    );
}

/// Instance validity at desk scale: the sign-perturbed states are true
/// density matrices and almost always eps-far from maximally mixed.
#[test]
fn criterion_05_hard_instance_validity() {
    let eps = 1.0 / 250.0;
    let mut lines = Vec::new();
    for &n in &[3usize, 4] {
        let d = 1usize << n;
        let basis = pauli_top_weight_basis(n, d * d / 2).unwrap();
        let params = HardnessParams::new(eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x0505 + n as u64);
        let trials = 10_000u32;
        let mut separated = 0u32;
        for _ in 0..trials {
            let inst = sample_instance(&basis, &params, &mut rng).unwrap();
            // Re-run the full density checks rather than trusting the type.
            DensityMatrix::new(inst.state.hermitian().clone()).unwrap();
            if inst.trace_dist_from_mixed >= eps {
                separated += 1;
            }
        }
        let frac = f64::from(separated) / f64::from(trials);
        assert!(frac >= 0.95, "n={n}: separated fraction {frac}");
        lines.push(format!("N={n}: {frac:.4}"));
    }
    println!(
        "PASS criterion 5: hard instances valid, eps-separated fraction {} (>= 0.95)",
        lines.join(", ")
    );
}

/// Packing separation: trace distance dominates the Hamming floor for
/// typical-set sign vectors.
#[test]
fn criterion_06_hamming_separation() {
    let basis = pauli_top_weight_basis(2, 8).unwrap();
    let params = HardnessParams::new(1.0 / 250.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0606);
    let kappa = empirical_kappa(&basis, 10_000, 0.999, &mut rng).unwrap();

    let mut pairs = 0u32;
    let mut min_margin = f64::INFINITY;
    while pairs < 1_000 {
        let a = sample_instance(&basis, &params, &mut rng).unwrap();
        if !a.in_g_set(kappa) {
            continue;
        }
        let b = sample_instance(&basis, &params, &mut rng).unwrap();
        if a.z == b.z {
            continue;
        }
        let check = hamming_separation_margin(&a, &b, &params, kappa).unwrap();
        assert!(
            check.trace_dist >= check.floor,
            "violation at pair {pairs}: lhs {} < floor {} (Ham {})",
            check.trace_dist,
            check.floor,
            check.hamming
        );
        min_margin = min_margin.min(check.trace_dist - check.floor);
        pairs += 1;
    }
    println!(
        "PASS criterion 6: 0 violations over 1000 G-set pairs \
         (kappa {kappa:.3}, smallest margin {min_margin:.3e})"
    );
}

/// The Pauli estimator meets its Hilbert-Schmidt error bound and its
/// end-to-end trace-distance guarantee at the prescribed copy count.
#[test]
fn criterion_07_pauli_estimator_error() {
    let mut lines = Vec::new();
    for &(n, m) in &[(2usize, 200u64), (3, 50)] {
        let bound = expected_hs_bound(n, m).unwrap();
        let mut state_rng = ChaCha8Rng::seed_from_u64(0x0707 + n as u64);
        let mut worst_ratio = 0.0f64;
        for s in 0..5u64 {
            let rho = hs_random(1 << n, &mut state_rng);
            let mut total = 0.0;
            let trials = 500u64;
            for t in 0..trials {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(0x0707_0000 + n as u64, s, t));
                let sheet = pauli_tomography_run(&rho, m, &mut rng).unwrap();
                let est = pauli_estimate(&sheet).unwrap();
                total += (est.matrix() - rho.hermitian().matrix()).frob_norm();
            }
            let mean = total / trials as f64;
            assert!(
                mean <= 1.05 * bound,
                "N={n} m={m} state {s}: mean HS {mean} over 1.05 x {bound}"
            );
            worst_ratio = worst_ratio.max(mean / bound);
        }
        lines.push(format!("N={n} m={m}: worst mean/bound {worst_ratio:.3}"));
    }

    let plan = pauli_copies_needed(2, 0.2, 0.1).unwrap();
    let mut successes = 0u32;
    let trials = 100u32;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x0707_1111, 0, u64::from(t)));
        let rho = hs_random(4, &mut rng);
        let sheet = pauli_tomography_run(&rho, plan.shots_per_setting, &mut rng).unwrap();
        let est = pauli_estimate(&sheet).unwrap();
        if trace_distance(&est, rho.hermitian()).unwrap() <= 0.2 {
            successes += 1;
        }
    }
    assert!(successes >= 90, "{successes}/100 end-to-end successes");
    println!(
        "PASS criterion 7: {}; end-to-end {successes}/100 within 0.2 at n={} copies",
        lines.join("; "),
        plan.total_copies
    );
}

/// MUB family invariants, exact reconstruction, and the grouped scheme's
/// success rate at its prescribed budget.
#[test]
fn criterion_08_mub_machinery() {
    let mut max_unitary_dev = 0.0f64;
    let mut max_overlap_dev = 0.0f64;
    let mut max_reconstruction = 0.0f64;
    for &d in &[2usize, 4, 8] {
        let fam = build_mub(d).unwrap();
        assert_eq!(fam.n_bases(), d + 1);
        for k in 0..fam.n_bases() {
            let b = fam.basis(k);
            let gram = &b.dagger() * b;
            let dev = (&gram - &ComplexMatrix::identity(d)).max_entry_abs();
            max_unitary_dev = max_unitary_dev.max(dev);
            for l in (k + 1)..fam.n_bases() {
                let c = fam.basis(l);
                for x in 0..d {
                    for y in 0..d {
                        let overlap: f64 = (0..d)
                            .map(|i| b[(i, x)].conj() * c[(i, y)])
                            .sum::<tomosim::linalg::C64>()
                            .norm_sqr();
                        max_overlap_dev =
                            max_overlap_dev.max((overlap - 1.0 / d as f64).abs());
                    }
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x0808 + d as u64);
        for _ in 0..20 {
            let rho = hs_random(d, &mut rng);
            let freqs = fam.exact_frequencies(&rho).unwrap();
            let ls = mub_ls_estimate(&freqs, &fam).unwrap();
            let dev = (ls.matrix() - rho.hermitian().matrix()).max_entry_abs();
            max_reconstruction = max_reconstruction.max(dev);
        }
    }
    assert!(max_unitary_dev < 1e-9, "unitarity {max_unitary_dev:.3e}");
    assert!(max_overlap_dev < 1e-9, "unbiasedness {max_overlap_dev:.3e}");
    assert!(max_reconstruction < 1e-9, "reconstruction {max_reconstruction:.3e}");

    let copies = mub_copies_needed(4, 0.25).unwrap();
    assert_eq!(copies, 1_177_348);
    let fam = build_mub(4).unwrap();
    let mut successes = 0u32;
    for t in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x0808_2222, 0, t));
        let rho = hs_random(4, &mut rng);
        let report = mub_tomography_run(&rho, &fam, copies, &mut rng).unwrap();
        let err = trace_distance(report.estimate.hermitian(), rho.hermitian()).unwrap();
        if err <= 0.25 {
            successes += 1;
        }
    }
    assert!(successes >= 99, "{successes}/100 grouped-run successes");
    println!(
        "PASS criterion 8: invariants within {:.1e}/{:.1e}, reconstruction within {:.1e}, \
         grouped run {successes}/100 at {copies} copies",
        max_unitary_dev, max_overlap_dev, max_reconstruction
    );
}

/// The simulation protocol's conditional output law is the input
/// distribution: exactly by enumeration, empirically at scale, and the
/// degenerate case is flagged rather than silently biased.
#[test]
fn criterion_09_eta_simulation_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0909);
    let mut max_dev = 0.0f64;
    for &d in &[2usize, 3, 4] {
        let part = BlockPartition::new(d, 1).unwrap();
        let mut done = 0;
        while done < 10 {
            let raw: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().ln()).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            if is_degenerate(&part, &p) {
                continue;
            }
            let law = referee_law_bruteforce(&part, &p).unwrap();
            for (c, q) in law.conditional.iter().zip(&p) {
                max_dev = max_dev.max((c - q).abs());
            }
            done += 1;
        }
    }
    assert!(max_dev < 1e-12, "brute-force law deviation {max_dev:.3e}");

    let part = BlockPartition::new(4, 1).unwrap();
    let p = [0.4, 0.3, 0.2, 0.1];
    let mut counts = [0u64; 4];
    let mut accepted = 0u64;
    while accepted < 100_000 {
        let samples = sample_indices(&p, part.players_per_round(), &mut rng);
        let msgs = round_messages(&part, &samples).unwrap();
        if let Some(x) = referee(&part, &msgs).unwrap() {
            counts[x] += 1;
            accepted += 1;
        }
    }
    let mut worst_sigmas = 0.0f64;
    for x in 0..4 {
        let freq = counts[x] as f64 / accepted as f64;
        let sigma = (p[x] * (1.0 - p[x]) / accepted as f64).sqrt();
        let pull = (freq - p[x]).abs() / sigma;
        assert!(pull < 5.0, "outcome {x}: {pull:.2} sigma");
        worst_sigmas = worst_sigmas.max(pull);
    }

    let point_mass = [1.0, 0.0, 0.0, 0.0];
    assert!(is_degenerate(&part, &point_mass));
    let law = referee_law_bruteforce(&part, &point_mass).unwrap();
    assert_eq!(law.accept_prob, 0.0);
    assert!(acceptance_factor(&part, &point_mass) <= f64::EPSILON);
    println!(
        "PASS criterion 9: exact law within {max_dev:.1e} (30 distributions), \
         empirical law within {worst_sigmas:.2} sigma over 1e5 accepted, \
         point mass flagged degenerate"
    );
}

/// k-outcome pipeline error decreases with the copy budget.
#[test]
fn criterion_10_k_outcome_end_to_end() {
    let config = ExperimentConfig {
        estimator: EstimatorKind::KOutcome,
        state: StateSpec::new(StateKind::HardInstance { eps: 0.2 }),
        sizes: vec![4],
        eps: vec![0.2],
        copies: vec![10_000, 100_000, 1_000_000],
        trials: 100,
        seed: 0x1010,
        k: Some(2),
        project: false,
        record_wall_time: false,
        output: None,
    };
    let out = run_sweep(&config).unwrap();
    assert_eq!(out.summary.cells.len(), 3);
    let means: Vec<f64> = out.summary.cells.iter().map(|c| c.mean_trace_error).collect();
    assert!(
        means[0] > means[1] && means[1] > means[2],
        "means not monotone: {means:?}"
    );
    println!(
        "PASS criterion 10: mean trace error {:.4} > {:.4} > {:.4} over 1e4/1e5/1e6 copies",
        means[0], means[1], means[2]
    );
}

/// Decoding hidden sign vectors from Pauli-estimator output beats the
/// information floor's error threshold.
#[test]
fn criterion_11_assouad_decode() {
    let basis = pauli_top_weight_basis(2, 8).unwrap();
    let params = HardnessParams::new(0.2).unwrap();
    let plan = pauli_copies_needed(2, 0.2, 0.1).unwrap();
    let m = plan.shots_per_setting;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1111);
    let report = assouad_decode_experiment(
        &basis,
        &params,
        200,
        |rho, trial_rng| {
            let sheet = pauli_tomography_run(rho, m, trial_rng).unwrap();
            pauli_estimate(&sheet).unwrap()
        },
        &mut rng,
    )
    .unwrap();
    assert!(report.avg_bit_error < 0.41, "avg bit error {}", report.avg_bit_error);
    println!(
        "PASS criterion 11: decode avg per-coordinate error {:.4} < 0.41 \
         (info floor {:.4}) over 200 trials",
        report.avg_bit_error, report.info_floor
    );
}

/// Identical config and seed produce byte-identical CSV.
#[test]
fn criterion_12_determinism() {
    let pauli = ExperimentConfig {
        estimator: EstimatorKind::Pauli,
        state: StateSpec::new(StateKind::HsRandom),
        sizes: vec![1, 2],
        eps: vec![0.3],
        copies: vec![300, 900],
        trials: 5,
        seed: 99,
        k: None,
        project: false,
        record_wall_time: false,
        output: None,
    };
    let a = csv_string(&run_sweep(&pauli).unwrap().records).unwrap();
    let b = csv_string(&run_sweep(&pauli).unwrap().records).unwrap();
    assert_eq!(a, b, "pauli sweep CSV not byte-identical");

    let mub = ExperimentConfig {
        estimator: EstimatorKind::Mub,
        state: StateSpec::new(StateKind::PureRandom),
        sizes: vec![2],
        eps: vec![0.3],
        copies: vec![4000],
        trials: 5,
        seed: 7,
        k: None,
        project: false,
        record_wall_time: false,
        output: None,
    };
    let c = csv_string(&run_sweep(&mub).unwrap().records).unwrap();
    let d = csv_string(&run_sweep(&mub).unwrap().records).unwrap();
    assert_eq!(c, d, "mub sweep CSV not byte-identical");
    assert_ne!(a, c);
    println!(
        "PASS criterion 12: repeated sweeps byte-identical ({} and {} CSV bytes)",
        a.len(),
        c.len()
    );
}
