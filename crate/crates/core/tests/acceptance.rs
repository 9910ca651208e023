//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its measured numbers. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the PASS lines of green criteria).

use lrll::certify::{
    correlation_measure, criticality_report, witness_check, witness_construct_objective,
    Classification,
};
use lrll::counterexamples::{
    dialed_delta_family, rank1_example, rank1_spurious_factor, rankr_linear_example,
    rankr_spurious_factor, theorem_witness_example,
};
use lrll::estimate::rip_estimate;
use lrll::factorized::FactorizedProblem;
use lrll::linalg::{balanced_factorize, truncated_svd_project, FactorPair};
use lrll::objectives::{fd_gradient, fd_hess_qform, Objective};
use lrll::rng::{gaussian_mat, stream_rng};
use lrll::scan::{strict_saddle_scan, SamplingSpec};
use lrll::sensing::gaussian_sensing;
use lrll::solvers::{gd_factorized, perturbed_gd, svp, svp_iteration_bound, Manifold, PerturbSchedule, Status};
use lrll::tensor::{OuterTensor, TensorObjective};
use lrll::Mat;
use std::time::Instant;

fn criterion(n: u32, name: &str, body: impl FnOnce() -> Result<String, String>) {
    match body() {
        Ok(detail) => println!("ACCEPTANCE {n} ({name}): PASS — {detail}"),
        Err(msg) => {
            println!("ACCEPTANCE {n} ({name}): FAIL — {msg}");
            panic!("acceptance criterion {n} ({name}) failed: {msg}");
        }
    }
}

fn random_mstar(n: usize, m: usize, r: usize, seed: u64) -> Mat {
    let mut rng = stream_rng(seed, 9_000_000);
    let mstar = gaussian_mat(n, r, &mut rng) * gaussian_mat(r, m, &mut rng);
    let norm = mstar.norm();
    mstar / norm
}

fn check(cond: bool, msg: String, failures: &mut Vec<String>) {
    if !cond {
        failures.push(msg);
    }
}

fn finish(started: Instant, limit_s: f64, detail: String, failures: Vec<String>) -> Result<String, String> {
    let elapsed = started.elapsed().as_secs_f64();
    let mut failures = failures;
    if elapsed > limit_s {
        failures.push(format!("runtime {elapsed:.1}s exceeds {limit_s}s"));
    }
    if failures.is_empty() {
        Ok(format!("{detail} [{elapsed:.1}s]"))
    } else {
        Err(failures.join("; "))
    }
}

/// Criterion 1: SVP linear rate on Gaussian sensing (n=m=30, r=3, p=900,
/// seed 0) with η = (1+δ̂)⁻¹, measured contraction ratios within
/// 2δ̂/(1−δ̂)+0.05, convergence within the iteration bound.
///
/// The criterion presumes the instance satisfies restricted isometry with
/// δ̂ < 1/3 at rank 2r = 6. Measured reality: the refined estimator certifies
/// a rank-6 deviation near 1.9 (the p = nm = 900 sampling operator has a
/// Marchenko–Pastur-type spectrum reaching ≈3.9 whose top eigendirections
/// are rank-6-compressible), so the premise fails — and with refinement
/// disabled the sampled estimate ≈0.11 makes the ratio bound 0.27 strictly
/// smaller than the measured contraction ≈0.70. The same machinery passes
/// end to end on an instance that genuinely satisfies the premise (see
/// `svp_criterion_logic_on_compliant_instance` in tests/solver_properties.rs).
#[test]
fn acceptance_1_svp_linear_rate() {
    criterion(1, "svp-linear-rate", || {
        let t0 = Instant::now();
        let (n, m, r, p) = (30, 30, 3, 900);
        let mstar = random_mstar(n, m, r, 0);
        let (_, obj) = gaussian_sensing(n, m, r, p, mstar, 0).map_err(|e| e.to_string())?;

        let delta_refined = rip_estimate(&obj, 2 * r, 16, 24, 0).map_err(|e| e.to_string())?;
        let delta_sampled = rip_estimate(&obj, 2 * r, 128, 0, 0).map_err(|e| e.to_string())?;

        let mut failures = Vec::new();

        // Premise of the criterion: δ̂ < 1/3 so that the step size and the
        // iteration bound are defined.
        let delta_hat = delta_refined;
        if delta_hat >= 1.0 / 3.0 {
            // Run the solver anyway and report what actually happens, so the
            // failure carries the full measurement.
            let eta = 1.0 / (1.0 + delta_sampled);
            let trace = svp(&obj, Manifold::Asymmetric, r, &Mat::zeros(n, m), eta, 200, 1e-8)
                .map_err(|e| e.to_string())?;
            let ratios = trace.gap_ratios(0.0);
            let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
            let sampled_bound = 2.0 * delta_sampled / (1.0 - delta_sampled) + 0.05;
            let converged = trace.status == Status::Converged;
            let iters = trace.rows.len() - 1;
            failures.push(format!(
                "premise δ̂ < 1/3 unattainable at p = 10nr: refined rank-6 (samples=16, refine=24) estimate is {delta_refined:.3}; \
                 with refinement off the lower bound is {delta_sampled:.3}, but the solver's measured max gap ratio \
                 {max_ratio:.3} (converged: {converged} in {iters} iterations at η = (1+{delta_sampled:.3})⁻¹) exceeds the criterion bound \
                 2δ̂/(1−δ̂)+0.05 = {sampled_bound:.3}; no estimator configuration satisfies both sub-criteria on this instance"
            ));
            return finish(t0, 30.0, String::new(), failures);
        }

        let eta = 1.0 / (1.0 + delta_hat);
        let m0 = Mat::zeros(n, m);
        let gap0 = obj.value(&m0);
        let bound_iters =
            svp_iteration_bound(delta_hat, gap0, 1e-8).map_err(|e| e.to_string())?;
        let trace = svp(&obj, Manifold::Asymmetric, r, &m0, eta, bound_iters + 10, 1e-8)
            .map_err(|e| e.to_string())?;
        let ratios = trace.gap_ratios(0.0);
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let ratio_bound = 2.0 * delta_hat / (1.0 - delta_hat) + 0.05;

        check(trace.status == Status::Converged, format!("did not reach 1e-8 ({:?})", trace.status), &mut failures);
        check(
            trace.rows.len() - 1 <= bound_iters,
            format!("took {} iterations, bound {bound_iters}", trace.rows.len() - 1),
            &mut failures,
        );
        check(
            max_ratio <= ratio_bound,
            format!("max gap ratio {max_ratio:.4} exceeds 2δ̂/(1−δ̂)+0.05 = {ratio_bound:.4}"),
            &mut failures,
        );
        finish(
            t0,
            30.0,
            format!("δ̂={delta_hat:.3}, {} iters ≤ {bound_iters}, max ratio {max_ratio:.3} ≤ {ratio_bound:.3}", trace.rows.len() - 1),
            failures,
        )
    });
}

/// Criterion 2: rank-1 counterexample certification for n = 2..5, both the
/// plain and regularized problems.
#[test]
fn acceptance_2_rank1_certification() {
    criterion(2, "rank1-certification", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();
        for n in 2..=5 {
            let obj = rank1_example(n).map_err(|e| e.to_string())?;
            let u = rank1_spurious_factor(n);
            let f = FactorPair::new(u.clone(), u).map_err(|e| e.to_string())?;
            for &mu in &[0.0, 0.1, 0.5] {
                let prob = FactorizedProblem::Asymmetric { obj: &obj, mu };
                let rep = criticality_report(&prob, &f, obj.mstar(), 1e-10, 1e-10)
                    .map_err(|e| e.to_string())?;
                check(
                    rep.grad_res_u <= 1e-10 && rep.grad_res_v <= 1e-10 && rep.problem_grad_norm <= 1e-10,
                    format!("n={n} μ={mu}: gradient residuals ({:.2e}, {:.2e})", rep.grad_res_u, rep.grad_res_v),
                    &mut failures,
                );
                check(
                    rep.hessian_lambda_min >= -1e-10,
                    format!("n={n} μ={mu}: λ_min = {:.3e}", rep.hessian_lambda_min),
                    &mut failures,
                );
                check(
                    (rep.value_gap - 0.375).abs() <= 1e-12,
                    format!("n={n} μ={mu}: f(M̃)−f(M*) = {} ≠ 3/8", rep.value_gap),
                    &mut failures,
                );
                check(
                    rep.classification == Classification::SpuriousSospCandidate,
                    format!("n={n} μ={mu}: classified {:?}", rep.classification),
                    &mut failures,
                );
            }
        }
        finish(t0, 5.0, "n=2..5, μ ∈ {0, 0.1, 0.5}: residuals ≤ 1e-10, λ_min ≥ −1e-10, gap = 3/8".into(), failures)
    });
}

/// Criterion 3: rank-r counterexample certification for r ∈ {1,2,3}.
#[test]
fn acceptance_3_rankr_certification() {
    criterion(3, "rankr-certification", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();
        for r in 1..=3 {
            let n = 2 * r;
            let obj = rankr_linear_example(r, n).map_err(|e| e.to_string())?;
            let u = rankr_spurious_factor(r, n);
            let mtilde = &u * u.transpose();

            let g = obj.gradient(&mtilde);
            let mut expected = Mat::zeros(n, n);
            for i in 0..r {
                expected[(2 * i, 2 * i)] = -0.75;
            }
            let entrywise = (&g - &expected).amax();
            check(entrywise <= 1e-12, format!("r={r}: gradient entrywise error {entrywise:.2e}"), &mut failures);

            let f = FactorPair::new(u.clone(), u.clone()).map_err(|e| e.to_string())?;
            for &mu in &[0.0, 0.1, 0.5] {
                let prob = FactorizedProblem::Asymmetric { obj: &obj, mu };
                let rep = criticality_report(&prob, &f, obj.mstar(), 1e-10, 1e-10)
                    .map_err(|e| e.to_string())?;
                check(
                    rep.problem_grad_norm <= 1e-10 && rep.hessian_lambda_min >= -1e-10,
                    format!("r={r} μ={mu}: grad {:.2e}, λ_min {:.3e}", rep.problem_grad_norm, rep.hessian_lambda_min),
                    &mut failures,
                );
                check(
                    rep.classification == Classification::SpuriousSospCandidate,
                    format!("r={r} μ={mu}: classified {:?}", rep.classification),
                    &mut failures,
                );
            }

            let corr = correlation_measure(&mtilde, obj.mstar()).map_err(|e| e.to_string())?;
            check(corr.abs() <= 1e-12, format!("r={r}: correlation {corr:.2e} ≠ 0"), &mut failures);
        }
        finish(t0, 10.0, "r ∈ {1,2,3}: ∇f = −¾Σe₍₂ᵢ₋₁₎, SOSP certificates, correlation 0".into(), failures)
    });
}

/// Criterion 4: restricted-isometry estimates of the counterexample
/// families.
#[test]
fn acceptance_4_rip_estimates() {
    criterion(4, "rip-estimates", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();

        let rank1 = rank1_example(3).map_err(|e| e.to_string())?;
        let d1 = rip_estimate(&rank1, 2, 64, 60, 0).map_err(|e| e.to_string())?;
        check((0.49..=0.5 + 1e-9).contains(&d1), format!("rank1: δ̂ = {d1}"), &mut failures);

        let rankr = rankr_linear_example(2, 4).map_err(|e| e.to_string())?;
        let dr = rip_estimate(&rankr, 4, 64, 60, 0).map_err(|e| e.to_string())?;
        check((0.48..=0.5 + 1e-9).contains(&dr), format!("rankr(r=2): δ̂ = {dr}"), &mut failures);

        let dialed = dialed_delta_family(&rank1, 0.6).map_err(|e| e.to_string())?;
        let dd = rip_estimate(&dialed, 2, 64, 60, 0).map_err(|e| e.to_string())?;
        check((dd - 0.30).abs() <= 0.01, format!("dialed θ=0.6: δ̂ = {dd}"), &mut failures);

        let id = TensorObjective::new(OuterTensor::identity(4, 4, 1.0), Mat::zeros(4, 4))
            .map_err(|e| e.to_string())?;
        let d0 = rip_estimate(&id, 2, 64, 60, 0).map_err(|e| e.to_string())?;
        check(d0 == 0.0, format!("identity: δ̂ = {d0} ≠ 0"), &mut failures);

        finish(
            t0,
            60.0,
            format!("rank1 {d1:.4}, rankr {dr:.4}, dialed {dd:.4}, identity {d0}"),
            failures,
        )
    });
}

/// Criterion 5: witness machinery — feasibility, α-interval rejection at
/// δ = 1/3, and the constructive converse.
#[test]
fn acceptance_5_witness_machinery() {
    criterion(5, "witness-machinery", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();

        let w = theorem_witness_example(2).map_err(|e| e.to_string())?;
        let rep = witness_check(&w);
        check(rep.feasible && rep.sufficient(), format!("example witness not feasible: {rep:?}"), &mut failures);
        check(rep.equality.slack <= 1e-12, format!("equality residual {:.2e}", rep.equality.slack), &mut failures);
        check(rep.trace_bound.slack.abs() <= 1e-12, format!("trace-line slack {:.2e}", rep.trace_bound.slack), &mut failures);

        // δ = 1/3 ⇒ the α-interval (1−δ, (1+δ)/2] = (2/3, 2/3] is empty
        let mut w3 = theorem_witness_example(2).map_err(|e| e.to_string())?;
        w3.delta = 1.0 / 3.0;
        for &alpha in &[0.5, 2.0 / 3.0, 0.6667, 0.75, 1.0] {
            w3.alpha = alpha;
            let r3 = witness_check(&w3);
            check(!r3.alpha_interval.pass && !r3.feasible, format!("δ=1/3, α={alpha} not rejected"), &mut failures);
        }

        let c = witness_construct_objective(&w, 4, 4).map_err(|e| e.to_string())?;
        check(
            (0.5 - 1e-12..=1.5 + 1e-12).contains(&c.lambda1) && (0.5 - 1e-12..=1.5 + 1e-12).contains(&c.lambda2),
            format!("core eigenvalues ({}, {}) outside [0.5, 1.5]", c.lambda1, c.lambda2),
            &mut failures,
        );
        let f = balanced_factorize(&c.mtilde, 2).map_err(|e| e.to_string())?;
        let prob = FactorizedProblem::Asymmetric { obj: &c.objective, mu: 0.0 };
        let cert = criticality_report(&prob, &f, &c.mstar, 1e-8, 1e-9).map_err(|e| e.to_string())?;
        check(
            cert.classification == Classification::SpuriousSospCandidate,
            format!("constructed M̃ classified {:?}", cert.classification),
            &mut failures,
        );

        finish(
            t0,
            10.0,
            format!("example4 feasible+tight, δ=1/3 rejected, construction certified (λ = {:.3}, {:.3})", c.lambda1, c.lambda2),
            failures,
        )
    });
}

/// Criterion 6: escape dichotomy on the dialed symmetric rank-1 family.
///
/// The initial-gradient-norm and θ = 1 stationarity sub-criteria hold. The
/// sub-criterion "GD from Ũ = e₂/√2 reaches f ≤ 1e-8 for θ < 1" does not:
/// the gradient of `h_s` at every multiple of e₂ is itself a multiple of e₂,
/// so span{e₂} is invariant under exact gradient descent and the iterates
/// converge to the spurious first-order point √(θ/2)·e₂ at objective value
/// ½ − θ²/8 (the e₁ components stay exactly zero in floating point; being
/// non-critical at the start guarantees descent, not escape from the
/// saddle's stable manifold). Perturbed descent does escape from the same
/// start — see `pgd_escapes_the_dialed_ray_saddle` in the solver tests.
#[test]
fn acceptance_6_escape_dichotomy() {
    criterion(6, "escape-dichotomy", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();
        let base = rank1_example(3).map_err(|e| e.to_string())?;

        for &theta in &[0.2, 0.6, 0.9] {
            let obj = dialed_delta_family(&base, theta).map_err(|e| e.to_string())?;
            let prob = FactorizedProblem::Symmetric { obj: &obj };
            let f0 = FactorPair::new_symmetric(rank1_spurious_factor(3)).map_err(|e| e.to_string())?;

            let g0 = prob.grad_norm(&f0).map_err(|e| e.to_string())?;
            let expected_g0 = (1.0 - theta) / 2.0_f64.sqrt();
            check(
                (g0 - expected_g0).abs() <= 1e-10,
                format!("θ={theta}: initial gradient {g0} vs (1−θ)/√2 = {expected_g0}"),
                &mut failures,
            );

            let trace = gd_factorized(&prob, &f0, 0.1, 200_000, 1e-12).map_err(|e| e.to_string())?;
            let ray_saddle_value = 0.5 - theta * theta / 8.0;
            check(
                trace.final_value() <= 1e-8,
                format!(
                    "θ={theta}: GD from e₂/√2 reaches f = {:.6} (= ½−θ²/8 = {ray_saddle_value:.6}, the spurious \
                     critical point on the invariant ray span{{e₂}}), not ≤ 1e-8; exact gradient descent cannot \
                     leave the ray because ∇h_s(βe₂) ∝ e₂, so this sub-criterion is unattainable for plain GD \
                     (perturbed GD from the same start does reach ≤ 1e-9)",
                    trace.final_value()
                ),
                &mut failures,
            );
        }

        // θ = 1: the start is exactly critical and stays put
        let obj1 = dialed_delta_family(&base, 1.0).map_err(|e| e.to_string())?;
        let prob1 = FactorizedProblem::Symmetric { obj: &obj1 };
        let f1 = FactorPair::new_symmetric(rank1_spurious_factor(3)).map_err(|e| e.to_string())?;
        let trace1 = gd_factorized(&prob1, &f1, 0.1, 1_000, 1e-12).map_err(|e| e.to_string())?;
        let max_grad = trace1.rows.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
        check(max_grad <= 1e-12, format!("θ=1: gradient reached {max_grad:.2e}"), &mut failures);

        finish(t0, 30.0, "gradient norms (1−θ)/√2 exact; θ=1 stationary".into(), failures)
    });
}

/// Criterion 7: no-spurious-SOSP sweep — perturbed descent on a Gaussian
/// sensing instance whose measured rank-2r isometry constant is below 1/3
/// reaches the global minimum from 20 random seeds.
#[test]
fn acceptance_7_pgd_sweep() {
    criterion(7, "no-spurious-sosp-sweep", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();
        let (n, m, r, p) = (10, 10, 2, 4000);
        let mstar = random_mstar(n, m, r, 0);
        let (_, obj) = gaussian_sensing(n, m, r, p, mstar, 0).map_err(|e| e.to_string())?;

        let delta = rip_estimate(&obj, 2 * r, 48, 48, 0).map_err(|e| e.to_string())?;
        check(delta < 1.0 / 3.0, format!("instance premise δ̂ = {delta:.3} ≥ 1/3"), &mut failures);
        if !failures.is_empty() {
            return finish(t0, 300.0, String::new(), failures);
        }

        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.5 };
        let mut converged = 0;
        for seed in 0..20u64 {
            let mut rng = stream_rng(seed, 7_000);
            let f0 = FactorPair::new(
                gaussian_mat(n, r, &mut rng) / (r as f64).sqrt(),
                gaussian_mat(m, r, &mut rng) / (r as f64).sqrt(),
            )
            .map_err(|e| e.to_string())?;
            let trace = perturbed_gd(&prob, &f0, 0.1, &PerturbSchedule::default(), 100_000, 1e-8, seed)
                .map_err(|e| e.to_string())?;
            if trace.status == Status::Converged && trace.final_value() <= 1e-8 {
                converged += 1;
            } else {
                failures.push(format!("seed {seed}: f = {:.3e} ({:?})", trace.final_value(), trace.status));
            }
        }
        finish(t0, 300.0, format!("δ̂ = {delta:.3} < 1/3; {converged}/20 runs reached f ≤ 1e-8"), failures)
    });
}

/// Criterion 8: invariant suites — technical identities, finite-difference
/// agreement across objective families, projection optimality, Procrustes
/// properties, and the lifting identities.
#[test]
fn acceptance_8_invariant_suites() {
    criterion(8, "invariant-suites", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();

        // (a) technical identities, 1000 random trials
        let mut rng = stream_rng(80, 0);
        let mut violations = 0;
        for _ in 0..1000 {
            let (n, m, r) = (5, 4, 2);
            let u = gaussian_mat(n, r, &mut rng);
            let v = gaussian_mat(m, r, &mut rng);
            let raw = gaussian_mat(n, r, &mut rng) * gaussian_mat(r, m, &mut rng);
            let star = balanced_factorize(&raw, r).map_err(|e| e.to_string())?;
            let f = FactorPair::new(u, v).map_err(|e| e.to_string())?;
            let w = f.stacked();
            let ws = star.stacked();
            let mdiff = (f.product() - star.product()).norm_squared();
            let wdiff = (&w * w.transpose() - &ws * ws.transpose()).norm_squared();
            let gram = f.balance_residual().powi(2);
            if 4.0 * mdiff < wdiff - gram - 1e-9 * (1.0 + wdiff) {
                violations += 1;
            }
            let bal = ((&ws * ws.transpose()).norm_squared() - 4.0 * star.product().norm_squared()).abs();
            if bal > 1e-9 * (1.0 + star.product().norm_squared()) {
                violations += 1;
            }
            let aligned = lrll::linalg::procrustes_align(&w, &ws).map_err(|e| e.to_string())?;
            let sr = lrll::linalg::sigma_r(&ws, r).map_err(|e| e.to_string())?;
            let bound = 2.0 * (2.0_f64.sqrt() - 1.0) * sr * sr * (&w - aligned).norm_squared();
            if wdiff < bound - 1e-9 * (1.0 + wdiff) {
                violations += 1;
            }
        }
        check(violations == 0, format!("{violations} technical-identity violations"), &mut failures);

        // (b) finite-difference gradient and Hessian checks per family
        let (_, sensing) = gaussian_sensing(4, 4, 1, 60, random_mstar(4, 4, 1, 8), 8).map_err(|e| e.to_string())?;
        let tensorial = rank1_example(4).map_err(|e| e.to_string())?;
        let lifted = lrll::lift::lift_to_symmetric(std::sync::Arc::new(rank1_example(2).map_err(|e| e.to_string())?), 0.5)
            .map_err(|e| e.to_string())?;
        let asymmetrized = lrll::lift::lift_to_asymmetric(std::sync::Arc::new(rank1_example(3).map_err(|e| e.to_string())?))
            .map_err(|e| e.to_string())?;
        let objs: Vec<(&str, &dyn Objective)> =
            vec![("sensing", &sensing), ("tensor", &tensorial), ("lifted-sym", &lifted), ("asymmetrized", &asymmetrized)];
        for (name, obj) in objs {
            let (n, m) = obj.dims();
            for trial in 0..20 {
                let mut rng = stream_rng(81, trial);
                let mm = gaussian_mat(n, m, &mut rng);
                let g = obj.gradient(&mm);
                let fd = fd_gradient(obj, &mm);
                let rel = (&g - &fd).norm() / g.norm().max(1.0);
                if rel > 1e-6 {
                    failures.push(format!("{name}: gradient FD error {rel:.2e}"));
                    break;
                }
                let k = gaussian_mat(n, m, &mut rng);
                let q = obj.hess_qform(&mm, &k);
                let qfd = fd_hess_qform(obj, &mm, &k);
                if (q - qfd).abs() / q.abs().max(1.0) > 1e-4 {
                    failures.push(format!("{name}: qform FD error"));
                    break;
                }
            }
        }

        // (c) projection optimality on both manifolds
        let mut rng = stream_rng(82, 0);
        'outer: for trial in 0..100 {
            let r = 1 + (trial % 3);
            let m = gaussian_mat(5, 4, &mut rng);
            let proj = truncated_svd_project(&m, r).map_err(|e| e.to_string())?;
            let best = (proj - &m).norm();
            let sq = gaussian_mat(4, 4, &mut rng);
            let sym = (&sq + sq.transpose()) * 0.5;
            let psd = lrll::linalg::psd_truncated_project(&sym, r).map_err(|e| e.to_string())?;
            let best_psd = (&psd - &sym).norm();
            for _ in 0..1000 {
                let k = truncated_svd_project(&gaussian_mat(5, 4, &mut rng), r).map_err(|e| e.to_string())?;
                if (k - &m).norm() < best - 1e-12 {
                    failures.push(format!("trial {trial}: rank-{r} projection beaten by a random candidate"));
                    break 'outer;
                }
                let kk = lrll::linalg::psd_truncated_project(
                    &{
                        let raw = gaussian_mat(4, 4, &mut rng);
                        (&raw + raw.transpose()) * 0.5
                    },
                    r,
                )
                .map_err(|e| e.to_string())?;
                if (kk - &sym).norm() < best_psd - 1e-12 {
                    failures.push(format!("trial {trial}: PSD projection beaten by a random candidate"));
                    break 'outer;
                }
            }
        }

        // (d) Procrustes orbit invariance
        let w = gaussian_mat(6, 2, &mut rng);
        let q = gaussian_mat(2, 2, &mut rng).qr().q();
        let dist = lrll::linalg::procrustes_distance(&(&w * &q), &w).map_err(|e| e.to_string())?;
        check(dist <= 1e-10, format!("orbit invariance violated: {dist:.2e}"), &mut failures);

        // (e) lifting identities and the rescaled-lift isometry bound
        let base_arc = {
            let mstar = random_mstar(8, 8, 1, 88);
            std::sync::Arc::new(gaussian_sensing(8, 8, 1, 4000, mstar, 88).map_err(|e| e.to_string())?.1)
        };
        let base_delta = rip_estimate(base_arc.as_ref(), 2, 96, 80, 0).map_err(|e| e.to_string())?;
        let lifted = lrll::lift::lift_to_symmetric(base_arc.clone(), base_delta).map_err(|e| e.to_string())?;
        let mut rng = stream_rng(83, 0);
        for _ in 0..50 {
            let u = gaussian_mat(8, 1, &mut rng);
            let v = gaussian_mat(8, 1, &mut rng);
            let f = FactorPair::new(u, v).map_err(|e| e.to_string())?;
            let w = f.stacked();
            let wwt = &w * w.transpose();
            let ha = base_arc.value(&f.product());
            let f_res = (lifted.ftilde(&wwt) - 2.0 * ha).abs();
            check(
                f_res <= 1e-9 * (1.0 + ha.abs()),
                format!("f̃(WWᵀ) ≠ 2h_a(U,V): {f_res:.2e}"),
                &mut failures,
            );
            let g_val = f.balance_residual().powi(2);
            let g_res = (lifted.gtilde(&wwt) - g_val).abs();
            check(
                g_res <= 1e-9 * (1.0 + g_val),
                format!("g̃(WWᵀ) ≠ g(U,V): {g_res:.2e}"),
                &mut failures,
            );
            if !failures.is_empty() {
                break;
            }
        }
        let lift_delta = rip_estimate(&lifted, 2, 64, 48, 0).map_err(|e| e.to_string())?;
        let lift_bound = 2.0 * base_delta / (1.0 + base_delta) + 0.02;
        check(
            lift_delta <= lift_bound,
            format!("lift δ̂ = {lift_delta:.4} exceeds 2δ̂/(1+δ̂)+0.02 = {lift_bound:.4} (base δ̂ = {base_delta:.4})"),
            &mut failures,
        );

        finish(
            t0,
            120.0,
            format!("identities 0/1000; FD checks pass; projections optimal; lift δ̂ {lift_delta:.3} ≤ {lift_bound:.3}"),
            failures,
        )
    });
}

/// Criterion 9: strict-saddle scan — a non-degenerate frontier on a
/// compliant sensing instance, and the δ = ½ spurious point flagged as an
/// obstruction.
#[test]
fn acceptance_9_strict_saddle_scan() {
    criterion(9, "strict-saddle-scan", || {
        let t0 = Instant::now();
        let mut failures = Vec::new();
        let (n, m, r, p) = (8, 8, 1, 2000);
        let mstar = random_mstar(n, m, r, 0);
        let (_, obj) = gaussian_sensing(n, m, r, p, mstar.clone(), 0).map_err(|e| e.to_string())?;
        let delta = rip_estimate(&obj, 2 * r, 48, 48, 0).map_err(|e| e.to_string())?;
        check(delta < 1.0 / 3.0, format!("instance premise δ̂ = {delta:.3} ≥ 1/3"), &mut failures);

        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.5 };
        let spec = SamplingSpec { gd_iters: 250, ..SamplingSpec::default() };
        // first pass to learn the geometry
        let probe = strict_saddle_scan(&prob, &mstar, r, 1e-9, 1e12, 1e12, 500, &spec, 9).map_err(|e| e.to_string())?;

        // distance of a random initialization (first ball point)
        let init_dist = probe.points.iter().find(|p| p.source == "ball").map(|p| p.dist).unwrap_or(1.0);
        let vertex = probe
            .frontier
            .iter()
            .filter(|v| v.alpha < init_dist && v.beta > 0.0 && v.gamma > 0.0)
            .max_by(|a, b| (a.beta * a.gamma).partial_cmp(&(b.beta * b.gamma)).unwrap());
        match vertex {
            None => failures.push("no frontier vertex with α below the random-init distance and β, γ > 0".into()),
            Some(v) => {
                let violators = probe
                    .points
                    .iter()
                    .filter(|pt| pt.dist > v.alpha && pt.grad_norm < v.beta && -pt.hessian_lambda_min < v.gamma)
                    .count();
                check(
                    violators == 0,
                    format!("frontier vertex (α={:.3}, β={:.3e}, γ={:.3e}) has {violators} violators", v.alpha, v.beta, v.gamma),
                    &mut failures,
                );
                if violators == 0 {
                    // re-run the scan at the certified triple: zero violations
                    let confirm =
                        strict_saddle_scan(&prob, &mstar, r, v.alpha, v.beta, v.gamma, 500, &spec, 9).map_err(|e| e.to_string())?;
                    check(
                        confirm.violation_count == 0,
                        format!("confirmation scan found {} violations", confirm.violation_count),
                        &mut failures,
                    );
                }
            }
        }

        // δ = ½ counterexample: the spurious point obstructs every frontier
        // with α below its orbit distance
        let ce = rank1_example(3).map_err(|e| e.to_string())?;
        let ce_prob = FactorizedProblem::Symmetric { obj: &ce };
        let sosp = FactorPair::new_symmetric(rank1_spurious_factor(3)).map_err(|e| e.to_string())?;
        let sosp_dist = {
            let star = balanced_factorize(ce.mstar(), 1).map_err(|e| e.to_string())?;
            lrll::linalg::procrustes_distance(&sosp.u, &star.u).map_err(|e| e.to_string())?
        };
        let ce_spec = SamplingSpec { extra_points: vec![sosp], ..SamplingSpec::default() };
        let ce_scan = strict_saddle_scan(&ce_prob, ce.mstar(), 1, 0.5 * sosp_dist, 1e-6, 1e-6, 100, &ce_spec, 10)
            .map_err(|e| e.to_string())?;
        check(
            ce_scan.violation_count >= 1 && ce_scan.obstructions.contains(&0),
            format!(
                "spurious point not flagged (violations {}, obstructions {:?})",
                ce_scan.violation_count, ce_scan.obstructions
            ),
            &mut failures,
        );

        finish(
            t0,
            300.0,
            format!("δ̂ = {delta:.3}; non-degenerate frontier certified on 500 points; SOSP flagged at dist {sosp_dist:.3}"),
            failures,
        )
    });
}
