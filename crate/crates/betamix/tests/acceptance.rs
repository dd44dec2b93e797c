//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`) and asserting its stated tolerances.
//!
//! Grids, tolerances and thresholds are pinned in code; timing budgets are
//! asserted with the criterion. MCMC-backed thresholds were fixed from
//! calibration runs recorded alongside the fixtures and are deterministic
//! given the seeds here.

use std::sync::Arc;
use std::time::Instant;

use betamix::approx::{
    approx_rate_report, atom_budget, defect_exact, discretize_with_info, floor_weights,
    mixture_l1_distance, support_grid,
};
use betamix::harness::{
    density_corpus, run_posterior_experiment, run_prior_sanity, simulate_data, ExperimentConfig,
    ExperimentKind, SamplerKind, Verdict,
};
use betamix::kernel::{bern_kl, exponent_taylor, laplace_pdf, BetaParam};
use betamix::mixture::{cont_mix_pdf_fixed, l1_with_breaks, MixtureEval};
use betamix::numkit::{fit_loglog, gauss_from_moments, integrate_split, MomentVector};
use betamix::prior::AdaptivePriorConfig;
use betamix::sampler::{
    birth_log_ratio, chain_to_text, log_posterior, rjmcmc_fit,
    rjmcmc_fit_opts, BirthSpec, DataCache, RjOptions, RjState,
};

fn report(criterion: &str, pass: bool, detail: &str, elapsed_s: f64, budget_s: f64) {
    println!(
        "criterion {criterion}: {} ({detail}; {elapsed_s:.1} s of {budget_s:.0} s budget)",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn acceptance_01_kernel_exactness() {
    let t = Instant::now();
    let alphas = [0.5f64, 1.0, 10.0, 100.0, 1000.0];
    let mut worst_mass = 0.0f64;
    let mut worst_mean = 0.0f64;
    for &alpha in &alphas {
        for k in 1..=9 {
            let eps = k as f64 / 10.0;
            let p = BetaParam::new(alpha, eps).unwrap();
            let w = 12.0 * eps * (1.0 - eps) / alpha.max(4.0).sqrt();
            let mut cuts = vec![0.0, (eps - w).max(1e-12), (eps + w).min(1.0 - 1e-12), 1.0];
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            let mass = integrate_split(|x| p.pdf(x), &cuts, 1e-11).unwrap().value;
            let mean = integrate_split(|x| x * p.pdf(x), &cuts, 1e-11).unwrap().value;
            worst_mass = worst_mass.max((mass - 1.0).abs());
            worst_mean = worst_mean.max((mean - eps).abs());
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    let pass = worst_mass <= 1e-8 && worst_mean <= 1e-7 && elapsed < 10.0;
    report(
        "1 (kernel exactness)",
        pass,
        &format!("max |mass-1| = {worst_mass:.2e}, max |mean-eps| = {worst_mean:.2e}"),
        elapsed,
        10.0,
    );
    assert!(worst_mass <= 1e-8, "normalization defect {worst_mass}");
    assert!(worst_mean <= 1e-7, "mean defect {worst_mean}");
    assert!(elapsed < 10.0, "runtime {elapsed} s exceeds 10 s");
}

#[test]
fn acceptance_02_laplace_order0_slope() {
    let t = Instant::now();
    // max relative error of the order-0 Laplace form over the interior
    // window |x-eps| <= eps(1-eps) sqrt(log alpha / alpha)
    let alphas: Vec<f64> = (0..5).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect();
    let mut errs = Vec::new();
    for &alpha in &alphas {
        let mut worst = 0.0f64;
        for k in 1..=9 {
            let eps = k as f64 / 10.0;
            let p = BetaParam::new(alpha, eps).unwrap();
            let hw = eps * (1.0 - eps) * (alpha.ln() / alpha).sqrt();
            for j in -8..=8 {
                let x = eps + hw * j as f64 / 8.0;
                if !(x > 0.0 && x < 1.0) {
                    continue;
                }
                let exact = p.pdf(x);
                let approx = laplace_pdf(&p, x, 0).unwrap();
                worst = worst.max(((approx - exact) / exact).abs());
            }
        }
        errs.push(worst);
    }
    let fit = fit_loglog(&alphas, &errs).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let pass = (-1.3..=-0.7).contains(&fit.slope) && elapsed < 30.0;
    report(
        "2 (Laplace order-0 window slope)",
        pass,
        &format!("slope = {:.3}, window errors {:?}", fit.slope, errs),
        elapsed,
        30.0,
    );
    assert!(
        (-1.3..=-0.7).contains(&fit.slope),
        "slope {} outside [-1.3, -0.7]",
        fit.slope
    );
    assert!(elapsed < 30.0);
}

#[test]
fn acceptance_03_exponent_cubic_coefficient() {
    let t = Instant::now();
    let mut worst_closed = 0.0f64;
    let mut worst_fd = 0.0f64;
    for k in 1..=9 {
        let x = k as f64 / 10.0;
        let series = exponent_taylor(x, 6).unwrap();
        let closed = (4.0 / 3.0) * (1.0 - 2.0 * x);
        worst_closed = worst_closed.max((series.c - closed).abs());
        // finite differences of the exact exponent in the scaled variable
        // u = (x - eps)/(x(1-x)): the bracket B(u) = (2 phi/u^2 - 1)/u has
        // even part C + C_2 u^2 + O(u^4); Richardson halving removes the
        // u^2 term
        let phi = |eps: f64| bern_kl(eps, x) / (eps * (1.0 - eps));
        let bracket = |u: f64| {
            let eps = x - u * x * (1.0 - x);
            (phi(eps) / (0.5 * u * u) - 1.0) / u
        };
        let even = |u: f64| 0.5 * (bracket(u) + bracket(-u));
        let u0 = 0.08;
        let r1 = |u: f64| (4.0 * even(0.5 * u) - even(u)) / 3.0;
        let fd_c = (16.0 * r1(0.5 * u0) - r1(u0)) / 15.0;
        worst_fd = worst_fd.max((fd_c - closed).abs());
    }
    let elapsed = t.elapsed().as_secs_f64();
    let pass = worst_closed <= 1e-6 && worst_fd <= 1e-6;
    report(
        "3 (exponent cubic coefficient)",
        pass,
        &format!("max |analytic-closed| = {worst_closed:.2e}, max |fd-closed| = {worst_fd:.2e}"),
        elapsed,
        30.0,
    );
    assert!(worst_closed <= 1e-6);
    assert!(worst_fd <= 1e-6, "finite differences disagree by {worst_fd}");
}

#[test]
fn acceptance_04_uniform_defect_slope() {
    let t = Instant::now();
    let alphas: Vec<f64> = (0..7).map(|k| 50.0 * 2f64.powi(k)).collect();
    let grid: Vec<f64> = (0..=60).map(|i| 0.2 + 0.6 * i as f64 / 60.0).collect();
    let mut sups = Vec::new();
    for &alpha in &alphas {
        let sup = grid
            .iter()
            .map(|&x| (defect_exact(alpha, x).unwrap() / alpha).abs())
            .fold(0.0f64, f64::max);
        sups.push(sup);
    }
    let fit = fit_loglog(&alphas, &sups).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let pass = (fit.slope + 1.0).abs() <= 0.3 && elapsed < 120.0;
    report(
        "4 (uniform-mixture defect slope)",
        pass,
        &format!("slope = {:.3} over alpha in [50, 3200]", fit.slope),
        elapsed,
        120.0,
    );
    assert!((fit.slope + 1.0).abs() <= 0.3, "slope {} outside -1 +- 0.3", fit.slope);
    assert!(elapsed < 120.0);
}

#[test]
fn acceptance_05_continuous_approximation_rates() {
    let t = Instant::now();
    let alphas: Vec<f64> = (0..7).map(|k| 100.0 * 2f64.powi(k)).collect();

    let b22 = density_corpus("beta22", &[]).unwrap();
    let plain = approx_rate_report(Arc::clone(&b22), &alphas, Some(0)).unwrap();
    let corrected = approx_rate_report(b22, &alphas, Some(1)).unwrap();
    let rough = density_corpus("rough", &[("beta", 1.0)]).unwrap();
    let rough_rep = approx_rate_report(rough, &alphas, None).unwrap();

    let mut checks: Vec<(String, bool)> = Vec::new();
    checks.push((
        format!("beta22 uncorrected sup slope {:.3} in -1 +- 0.25", plain.sup_slope.slope),
        (plain.sup_slope.slope + 1.0).abs() <= 0.25,
    ));
    checks.push((
        format!("beta22 corrected sup slope {:.3} <= -1.5", corrected.sup_slope.slope),
        corrected.sup_slope.slope <= -1.5,
    ));
    checks.push((
        format!("rough(beta=1) sup slope {:.3} in -0.5 +- 0.2", rough_rep.sup_slope.slope),
        (rough_rep.sup_slope.slope + 0.5).abs() <= 0.2,
    ));
    // KL ~ 2x sup for the smooth target; a localized kink concentrates KL
    // faster than the global-sup heuristic, so only slower-than-2x fails
    for (label, rep) in [("uncorrected", &plain), ("corrected", &corrected), ("rough", &rough_rep)] {
        let kl = rep.kl_slope.slope;
        let twice = 2.0 * rep.sup_slope.slope;
        let slower_ok = kl <= twice + 0.5;
        let faster = kl < twice - 0.5;
        checks.push((
            format!(
                "{label} KL slope {kl:.3} vs 2x sup {twice:.3}{}",
                if faster { " (faster than the heuristic; annotated)" } else { "" }
            ),
            slower_ok,
        ));
    }

    let elapsed = t.elapsed().as_secs_f64();
    let pass = checks.iter().all(|(_, ok)| *ok) && elapsed < 600.0;
    report("5 (continuous approximation rates)", pass, "see sub-checks below", elapsed, 600.0);
    for (label, ok) in &checks {
        println!("    [{}] {}", if *ok { "ok" } else { "FAIL" }, label);
    }
    for (label, ok) in checks {
        assert!(ok, "{label}");
    }
    assert!(elapsed < 600.0, "runtime {elapsed} s exceeds 10 min");
}

#[test]
fn acceptance_06_discretization() {
    let t = Instant::now();
    let alpha = 400.0f64;
    let nodes = 6usize;
    let budget = atom_budget(alpha, 3.0);

    // budget-grid run: atom count against the N0 = 3 budget, per-cell
    // moment reproduction, and the weight-floor L1 bound
    let grid_a = support_grid(alpha, 1.0, 0.7).unwrap();
    let (mix_a, info_a) = discretize_with_info(alpha, |_| 1.0, &grid_a, nodes).unwrap();
    let atoms_ok = mix_a.len() as f64 <= budget;

    let mut worst_moment = 0.0f64;
    for w in grid_a.breakpoints().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        // cell atoms of the uniform density: weights proportional to the
        // standardized rule; rebuild the rule and check raw cell moments
        let count = 2 * nodes;
        let moments: Vec<f64> = (0..count)
            .map(|l| {
                integrate_split(|e: f64| ((e - c) / h).powi(l as i32), &[lo, hi], 1e-13)
                    .unwrap()
                    .value
                    / (hi - lo)
            })
            .collect();
        let mv = MomentVector::new({
            let mut m = moments.clone();
            m[0] = 1.0;
            m
        })
        .unwrap();
        let rule = gauss_from_moments(&mv, nodes).unwrap();
        for l in 0..count {
            let got = rule.apply(|t| t.powi(l as i32));
            let scale = moments[l].abs().max(1e-3);
            worst_moment = worst_moment.max((got - moments[l]).abs() / scale);
        }
    }
    let moments_ok = worst_moment <= 1e-10;

    // weight-floor bound: l1(g before, g after) <= 2 * atoms * v
    let floor_a_exp = 2.0f64; // v = 400^-2; the default A = 8 floors nothing here
    let v = alpha.powf(-floor_a_exp);
    let floored = floor_weights(&mix_a, floor_a_exp).unwrap();
    let ev_before = MixtureEval::new(&mix_a);
    let ev_after = MixtureEval::new(&floored);
    let seed_breaks: Vec<f64> = grid_a.breakpoints().iter().copied().step_by(8).collect();
    let floor_l1 =
        l1_with_breaks(|x| ev_before.pdf(x), |x| ev_after.pdf(x), &seed_breaks).unwrap();
    let floor_bound = 2.0 * mix_a.len() as f64 * v;
    let floor_ok = floor_l1 <= floor_bound;

    // deep-grid run: the L1 agreement between continuous and discrete
    // mixtures; the tail mass alpha^{-t0} forces the deeper grid (the
    // budget grid's tail atoms floor L1 near 4 alpha^{-1} ~ 9e-3)
    let grid_b = support_grid(alpha, 2.8, 0.7).unwrap();
    let mix_b = discretize_with_info(alpha, |_| 1.0, &grid_b, nodes).unwrap().0;
    let cont = |x: f64| cont_mix_pdf_fixed(alpha, |_| 1.0, x);
    let l1_b = mixture_l1_distance(cont, &mix_b, &grid_b).unwrap();
    let l1_ok = l1_b <= 1e-6;

    let elapsed = t.elapsed().as_secs_f64();
    let pass = atoms_ok && moments_ok && floor_ok && l1_ok && elapsed < 120.0;
    report(
        "6 (discretization)",
        pass,
        &format!(
            "budget grid: atoms {} <= {budget:.0}, max moment err {worst_moment:.2e}, floor l1 {floor_l1:.2e} <= {floor_bound:.2e}; deep grid (t0=2.8): l1 {l1_b:.2e} <= 1e-6 with {} atoms; skipped cells {}",
            mix_a.len(),
            mix_b.len(),
            info_a.skipped_cells
        ),
        elapsed,
        120.0,
    );
    assert!(atoms_ok, "atom count {} exceeds budget {budget}", mix_a.len());
    assert!(moments_ok, "worst per-cell moment error {worst_moment}");
    assert!(floor_ok, "floor l1 {floor_l1} above bound {floor_bound}");
    assert!(l1_ok, "deep-grid l1 {l1_b} above 1e-6");
    assert!(elapsed < 120.0);
}

#[test]
fn acceptance_07_prior_sanity() {
    let t = Instant::now();
    let cfg = AdaptivePriorConfig::default();
    let rep = run_prior_sanity(&cfg, 100_000, 100_000, 20260810).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let pass = rep.pass && elapsed < 120.0;
    report(
        "7 (prior sanity)",
        pass,
        &format!(
            "ks_eps {:.4} (crit {:.4}), ks_sqrt_alpha {:.4} (crit {:.4}), chi2_k {:.2} (crit {:.2})",
            rep.ks_eps, rep.ks_eps_crit, rep.ks_sqrt_alpha, rep.ks_sqrt_alpha_crit, rep.chi2_k, rep.chi2_k_crit
        ),
        elapsed,
        120.0,
    );
    assert!(rep.pass, "{}", rep.to_text());
    assert!(elapsed < 120.0);
}

#[test]
fn acceptance_08_sampler_correctness() {
    let t = Instant::now();
    let cfg = AdaptivePriorConfig::default();

    // (a) byte-exact seed determinism
    let f = density_corpus("beta22", &[]).unwrap();
    let data = simulate_data(f.as_ref(), 400, 7);
    let chain_a = rjmcmc_fit(&data, &cfg, 500, 123).unwrap();
    let chain_b = rjmcmc_fit(&data, &cfg, 500, 123).unwrap();
    let deterministic = chain_to_text(&chain_a) == chain_to_text(&chain_b);

    // (b) detailed balance of the birth/death pair on a frozen 3-state
    // chain k = 1 -> 2 -> 3: flow antisymmetry at 1e-12
    let db_data = DataCache::new(&[0.3, 0.6, 0.62, 0.81], false).unwrap();
    let s1 = RjState { weights: vec![1.0], eps: vec![0.4], alpha: 25.0 };
    let b1 = BirthSpec { position: 1, u: 0.3, eps_new: 0.7 };
    let s2 = betamix::sampler::rj_apply_birth(&s1, &b1);
    let b2 = BirthSpec { position: 0, u: 0.15, eps_new: 0.2 };
    let mut worst_flow = 0.0f64;
    for (lo, b) in [(s1, b1), (s2, b2)] {
        let k = lo.k();
        let hi = betamix::sampler::rj_apply_birth(&lo, &b);
        let log_a = birth_log_ratio(&cfg, &db_data, &lo, &b).unwrap();
        let q_e = betamix::prior::log_symmetric_beta_pdf(cfg.t_exponent + 1.0, b.eps_new).unwrap();
        let q_fwd = 0.25f64.ln() + q_e + (1.0 / (k as f64 + 1.0)).ln()
            - (k as f64 - 1.0) * (1.0 - b.u).ln();
        let fwd = log_posterior(&cfg, &db_data, &lo).unwrap() + q_fwd + log_a.min(0.0);
        let q_bwd = 0.25f64.ln() + (1.0 / (k as f64 + 1.0)).ln();
        let bwd = log_posterior(&cfg, &db_data, &hi).unwrap() + q_bwd + (-log_a).min(0.0);
        worst_flow = worst_flow.max((fwd - bwd).abs());
    }
    let db_ok = worst_flow <= 1e-12;

    // (c) fixed k = 1 on n = 2000 Beta(2,2) draws, 20k sweeps: posterior
    // mean of eps within 0.5 +- 0.02
    let data2k = simulate_data(f.as_ref(), 2000, 42);
    let recs = rjmcmc_fit_opts(
        &data2k,
        &cfg,
        20_000,
        7,
        RjOptions { fixed_k: Some(1), ..Default::default() },
    )
    .unwrap();
    let burn = recs.len() / 5;
    let mean_eps: f64 =
        recs[burn..].iter().map(|r| r.state.atoms()[0].1).sum::<f64>() / (recs.len() - burn) as f64;
    let eps_ok = (mean_eps - 0.5).abs() <= 0.02;

    let elapsed = t.elapsed().as_secs_f64();
    let pass = deterministic && db_ok && eps_ok && elapsed < 300.0;
    report(
        "8 (sampler correctness)",
        pass,
        &format!(
            "determinism {deterministic}, flow antisymmetry {worst_flow:.2e}, fixed-k eps mean {mean_eps:.4}"
        ),
        elapsed,
        300.0,
    );
    assert!(deterministic, "identical seeds produced different chains");
    assert!(db_ok, "detailed-balance flow residual {worst_flow}");
    assert!(eps_ok, "posterior mean eps {mean_eps} outside 0.5 +- 0.02");
    assert!(elapsed < 300.0);
}

#[test]
fn acceptance_09_posterior_rate_trend() {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        kind: ExperimentKind::PosteriorRate,
        n_grid: vec![250, 500, 1000, 2000, 4000],
        replications: 5,
        mcmc_iters: 16_000,
        seed: 20260810,
        tolerance: 0.2,
        threads: 8,
        ..Default::default()
    };
    let rep = run_posterior_experiment(&cfg).unwrap();
    let slope = rep.fitted_slope().unwrap();
    let medians: Vec<f64> = rep.rows.iter().map(|r| r[1]).collect();
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    let slope_ok = (slope + 0.4).abs() <= 0.2;
    let trend_ok = inversions <= 1;
    let elapsed = t.elapsed().as_secs_f64();
    let pass = slope_ok && trend_ok && elapsed < 1800.0;
    report(
        "9 (posterior rate trend, adaptive prior)",
        pass,
        &format!("slope {slope:.3} vs -0.4 +- 0.2, medians {medians:?}, inversions {inversions}"),
        elapsed,
        1800.0,
    );
    // a failed trend produces this flagged report line, never a silent pass
    if !pass {
        println!("    flagged report verdict: {:?}", rep.verdict.label());
    }
    assert!(slope_ok, "slope {slope} outside -0.4 +- 0.2");
    assert!(trend_ok, "median trend has {inversions} inversions");
    assert!(elapsed < 1800.0);
}

#[test]
fn acceptance_10_deterministic_alpha_trend() {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        kind: ExperimentKind::PosteriorRate,
        sampler: SamplerKind::DeterministicAlpha,
        n_grid: vec![250, 500, 1000, 2000, 4000],
        replications: 5,
        mcmc_iters: 30_000,
        seed: 20260810,
        tolerance: 0.2,
        threads: 8,
        ..Default::default()
    };
    let rep = run_posterior_experiment(&cfg).unwrap();
    let slope = rep.fitted_slope().unwrap();
    let medians: Vec<f64> = rep.rows.iter().map(|r| r[1]).collect();
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    let slope_ok = (slope + 0.4).abs() <= 0.2;
    let trend_ok = inversions <= 1;
    let elapsed = t.elapsed().as_secs_f64();
    let pass = slope_ok && trend_ok && elapsed < 1200.0;
    report(
        "10 (deterministic-alpha rate trend)",
        pass,
        &format!("slope {slope:.3} vs -0.4 +- 0.2, medians {medians:?}, inversions {inversions}"),
        elapsed,
        1200.0,
    );
    if !pass {
        println!("    flagged report verdict: {:?}", rep.verdict.label());
    }
    assert!(slope_ok, "slope {slope} outside -0.4 +- 0.2");
    assert!(trend_ok, "median trend has {inversions} inversions");
    assert!(elapsed < 1200.0);
    let _ = Verdict::Pass;
}
