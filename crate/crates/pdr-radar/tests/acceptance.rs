//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Reference values come from the published wideband design study this
//! library reproduces; tolerances absorb initialization randomness.

use pdr_radar::beampattern::{
    assemble_quadratic, design_beampattern, deviation_db, evaluate_pattern, scenario_cases,
    seeded_code, spectrum_at, steering_vector, unconstrained_baseline, DesiredPattern, Grid,
    RadarConfig,
};
use pdr_radar::config::bundled_case_configs;
use pdr_radar::linalg::{dot, norms, HermitianMatrix};
use pdr_radar::manifold::{project_tangent, psi_decomposition, retract, FeasiblePoint};
use pdr_radar::mismatch::{
    correlation_matrix, g_tr, g_tr_coherent, g_tr_orthogonal, MismatchSetup,
};
use pdr_radar::ortho::{
    design_beampattern_penalized, gradient_h, isl0_db, lfm_set, penalty_gradient, WaveformMatrix,
};
use pdr_radar::solver::{
    pdr_solve, pdr_step, safe_gamma, safe_step_size, QuadraticCost, SolverParams, Termination,
};
use pdr_radar::C64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rng_for(trial: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(0xACCE_0000 + trial)
}

fn random_vector(rng: &mut ChaCha12Rng, n: usize, scale: f64) -> Vec<C64> {
    let dist = Uniform::new(-1.0, 1.0);
    (0..n)
        .map(|_| c(dist.sample(rng) * scale, dist.sample(rng) * scale))
        .collect()
}

fn random_feasible(rng: &mut ChaCha12Rng, n: usize) -> FeasiblePoint {
    let dist = Uniform::new(0.0, 2.0 * std::f64::consts::PI);
    let phases: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
    FeasiblePoint::from_phases(&phases)
}

/// Random PSD matrix BᴴB.
fn random_psd(rng: &mut ChaCha12Rng, n: usize) -> HermitianMatrix {
    let b: Vec<Vec<C64>> = (0..n).map(|_| random_vector(rng, n, 1.0)).collect();
    HermitianMatrix::from_upper(n, |i, j| {
        let mut acc = c(0.0, 0.0);
        for row in &b {
            acc += row[i].conj() * row[j];
        }
        acc
    })
}

struct LemmaInstance {
    cost: QuadraticCost,
    beta: f64,
    x: FeasiblePoint,
}

fn lemma_instance(trial: u64) -> LemmaInstance {
    let mut rng = rng_for(trial);
    let l = 2 + (trial as usize % 15); // L in {2, ..., 16}
    let p = random_psd(&mut rng, l);
    let q = random_vector(&mut rng, l, 1.5);
    let gamma = safe_gamma(&p, &q);
    let cost = QuadraticCost::new(p, q, 0.0, gamma).expect("valid instance");
    let beta = safe_step_size(&cost, 0.99);
    let x = random_feasible(&mut rng, l);
    LemmaInstance { cost, beta, x }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

#[test]
fn criterion_01_case1_reproduction() {
    let configs = bundled_case_configs();
    let cfg = configs[0].radar.to_radar_config().unwrap();
    let scenario = configs[0].scenario.resolve().unwrap();
    let params = configs[0].solver.to_params();
    assert_eq!(params.beta, 5.0e-5, "bundled case1 step size");
    let x0 = seeded_code(cfg.code_len(), configs[0].seed);
    // the runtime budget is specified single-threaded; pin a 1-worker pool
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let t0 = Instant::now();
    let (x_star, trace) = pool
        .install(|| {
            design_beampattern(
                &cfg,
                &scenario,
                &params,
                configs[0].solver.zeta_for(cfg.code_len()),
                configs[0].solver.outer_max,
                &x0,
            )
        })
        .unwrap();
    let wall = t0.elapsed().as_secs_f64();
    let dev = deviation_db(&cfg, &scenario, x_star.as_slice()).unwrap();
    let combined = trace.total_inner_iterations;

    // beampattern structure vs the scenario template
    let grid = evaluate_pattern(&cfg, x_star.as_slice()).unwrap();
    let bins = cfg.frequency_bins();
    let mut passband = Vec::new();
    let mut stopband = Vec::new();
    for (s, &theta) in cfg.theta_grid_deg.iter().enumerate() {
        for (ip, &p) in bins.iter().enumerate() {
            let d = scenario.amplitude_at(theta, cfg.bin_freq_hz(p));
            if d > 0.5 {
                passband.push(grid.db.get(s, ip));
            } else {
                stopband.push(grid.db.get(s, ip));
            }
        }
    }
    let pass_med = median(&mut passband);
    let stop_med = median(&mut stopband);
    let suppression = pass_med - stop_med;
    let spread = passband
        .iter()
        .map(|v| (v - pass_med).abs())
        .fold(0.0f64, f64::max);

    println!(
        "criterion 01 (case1 reproduction): deviation {dev:.2} dB (<= 24.3), \
         {combined} combined inner steps (<= 300), {wall:.2} s (<= 120), \
         stopband suppressed {suppression:.1} dB below passband median (>= 10), \
         passband max offset {spread:.1} dB -> {}",
        if dev <= 24.3 && combined <= 300 && wall <= 120.0 && suppression >= 10.0 {
            "PASS"
        } else {
            "FAIL"
        }
    );
    assert!(dev <= 24.3, "deviation {dev} dB exceeds 24.3 dB");
    assert!(combined <= 300, "{combined} combined iterations exceed 300");
    assert!(wall <= 120.0, "wall time {wall} s exceeds 120 s");
    assert!(
        suppression >= 10.0,
        "stopband median only {suppression} dB below passband median"
    );
    assert!(
        spread <= 10.0,
        "passband is not near-flat: max offset {spread} dB from its median"
    );
}

#[test]
fn criterion_02_unconstrained_bounds() {
    let cfg = RadarConfig::standard();
    let cases = scenario_cases();
    let targets = [19.93, 19.52, 18.18];
    let mut measured = Vec::new();
    for scen in &cases {
        let (_, dev) = unconstrained_baseline(&cfg, scen, 200).unwrap();
        measured.push(dev);
    }
    let mut failures = Vec::new();
    for (i, (&target, &got)) in targets.iter().zip(measured.iter()).enumerate() {
        let ok = (got - target).abs() <= 1.0;
        println!(
            "criterion 02 (unconstrained bound, case{}): {got:.2} dB vs {target} +/- 1 dB -> {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!("case{}: {got:.2} dB vs {target} +/- 1", i + 1));
        }
    }
    assert!(
        failures.is_empty(),
        "unconstrained baselines outside tolerance: {}. The alternating \
         least-squares bound converges to the same value from any start \
         (verified against a per-bin multistart probe of the decoupled \
         problem), so the published case2/case3 reference values are not \
         reachable from this formulation; case1 and every constant-modulus \
         design metric match their references.",
        failures.join("; ")
    );
}

#[test]
fn criterion_03_lemma1_tangent_descent() {
    let t0 = Instant::now();
    for trial in 0..500u64 {
        let inst = lemma_instance(trial);
        let (f_x, _) = inst.cost.cost_value(inst.x.as_slice()).unwrap();
        let (_, x_bar) = pdr_step(&inst.cost, &inst.x, inst.beta).unwrap();
        let (f_bar, _) = inst.cost.cost_value(&x_bar).unwrap();
        assert!(
            f_bar <= f_x + 1e-9,
            "trial {trial}: tangent step raised the cost by {}",
            f_bar - f_x
        );
    }
    let wall = t0.elapsed().as_secs_f64();
    println!(
        "criterion 03 (tangent-descent bound, 500 trials): all non-increasing, {wall:.2} s (< 10) -> {}",
        if wall < 10.0 { "PASS" } else { "FAIL" }
    );
    assert!(wall < 10.0, "suite took {wall} s");
}

#[test]
fn criterion_04_lemma2_retraction_descent() {
    for trial in 0..500u64 {
        let inst = lemma_instance(trial);
        let (next, x_bar) = pdr_step(&inst.cost, &inst.x, inst.beta).unwrap();
        let (f_bar, _) = inst.cost.cost_value(&x_bar).unwrap();
        let (f_next, _) = inst.cost.cost_value(next.as_slice()).unwrap();
        assert!(
            f_next <= f_bar + 1e-9,
            "trial {trial}: retraction raised the cost by {}",
            f_next - f_bar
        );
        let psi = psi_decomposition(&x_bar, &next).unwrap();
        for ((xb, xn), p) in x_bar.iter().zip(next.as_slice()).zip(psi.iter()) {
            assert!(
                (xb - xn * (1.0 + p)).norm() <= 1e-10,
                "trial {trial}: radial-excess reconstruction failed"
            );
        }
    }
    println!("criterion 04 (retraction descent + radial-excess identity, 500 trials): PASS");
}

#[test]
fn criterion_05_full_solve_convergence() {
    for trial in 0..500u64 {
        let inst = lemma_instance(trial);
        let params = SolverParams {
            beta: inst.beta,
            epsilon: 1e-10,
            max_iter: 100_000,
            safe_mode: false,
            assert_monotone: true,
        };
        let (_, trace) = pdr_solve(&inst.cost, &inst.x, &params).unwrap();
        for w in trace.costs.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "trial {trial}: non-monotone trace under safe parameters"
            );
        }
        assert!(
            matches!(
                trace.termination,
                Termination::CostDelta | Termination::StationaryPoint
            ),
            "trial {trial}: terminated by {:?} after {} iterations",
            trace.termination,
            trace.iterations_run
        );
    }
    println!("criterion 05 (monotone convergent solves, 500 trials): PASS");
}

#[test]
fn criterion_06_gradient_finite_differences() {
    let h = 1e-6;
    for trial in 0..50u64 {
        let mut rng = rng_for(9000 + trial);
        let antennas = 2 + (trial as usize % 3);
        let samples = 4;
        let l = antennas * samples;
        let p = random_psd(&mut rng, l);
        let q = random_vector(&mut rng, l, 1.0);
        let quad = QuadraticCost::new(p, q, 0.4, 0.3).unwrap();
        let alpha = 0.7;
        let x = random_vector(&mut rng, l, 1.0);
        let xm = WaveformMatrix::from_code(&x, antennas, samples).unwrap();
        let g_quad = quad.gradient(&x).unwrap();
        let g_h = gradient_h(&quad, &xm, alpha).unwrap();
        for dir in 0..20 {
            let raw = random_vector(&mut rng, l, 1.0);
            let dn = norms(&raw).l2;
            let delta: Vec<C64> = raw.into_iter().map(|v| v / dn).collect();
            let xp: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a + d * h).collect();
            let xmn: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a - d * h).collect();

            let fd_quad =
                (quad.cost_value(&xp).unwrap().0 - quad.cost_value(&xmn).unwrap().0) / (2.0 * h);
            let an_quad = dot(&g_quad, &delta).re;
            assert!(
                (fd_quad - an_quad).abs() <= 1e-6 * an_quad.abs().max(1.0),
                "trial {trial} dir {dir}: quadratic gradient fd {fd_quad} vs {an_quad}"
            );

            let pen = |v: &[C64]| {
                let w = WaveformMatrix::from_code(v, antennas, samples).unwrap();
                pdr_radar::ortho::penalty_value(&w, alpha)
            };
            let fd_h = (quad.cost_value(&xp).unwrap().0 + pen(&xp)
                - quad.cost_value(&xmn).unwrap().0
                - pen(&xmn))
                / (2.0 * h);
            let an_h = dot(&g_h, &delta).re;
            assert!(
                (fd_h - an_h).abs() <= 1e-6 * an_h.abs().max(1.0),
                "trial {trial} dir {dir}: penalised gradient fd {fd_h} vs {an_h}"
            );
        }
    }
    println!("criterion 06 (finite-difference gradient checks, 50x20x2): PASS");
}

#[test]
fn criterion_07_projection_retraction_invariants() {
    for trial in 0..200u64 {
        let mut rng = rng_for(7000 + trial);
        let antennas = 2 + (trial as usize % 3);
        let samples = 2 * (2 + (trial as usize % 3));
        let l = antennas * samples;
        let z = random_feasible(&mut rng, l);
        let w = random_vector(&mut rng, l, 2.0);

        // tangency
        let t = project_tangent(&z, &w).unwrap();
        for (vl, zl) in t.as_slice().iter().zip(z.as_slice()) {
            assert!(
                (vl.conj() * zl).re.abs() <= 1e-10,
                "trial {trial}: tangency"
            );
        }
        // idempotence
        let t2 = project_tangent(&z, t.as_slice()).unwrap();
        for (a, b) in t2.as_slice().iter().zip(t.as_slice()) {
            assert!((a - b).norm() <= 1e-10, "trial {trial}: idempotence");
        }
        // elementwise form vs diagonal reformulation ½(w − z²w*)
        for ((pl, zl), wl) in t.as_slice().iter().zip(z.as_slice()).zip(w.iter()) {
            let ddiag = (wl - zl * zl * wl.conj()) * 0.5;
            assert!((pl - ddiag).norm() <= 1e-10, "trial {trial}: dual formula");
        }
        // retraction idempotence on the step
        let x_bar = t.step_from_base(0.3);
        let r1 = retract(&x_bar).unwrap();
        let r2 = retract(r1.as_slice()).unwrap();
        for (a, b) in r1.as_slice().iter().zip(r2.as_slice()) {
            assert!(
                (a - b).norm() <= 1e-10,
                "trial {trial}: retract idempotence"
            );
        }

        // the two penalty-gradient forms agree after projection
        let xm = WaveformMatrix::from_code(z.as_slice(), antennas, samples).unwrap();
        let alpha = 1.3;
        let full = penalty_gradient(&xm, alpha);
        let cubic: Vec<C64> = {
            // bare cubic form 4α·vec(XXᴴX) = full + 4αN·x
            let scale = 4.0 * alpha * samples as f64;
            full.iter()
                .zip(z.as_slice())
                .map(|(f, x)| f + x * scale)
                .collect()
        };
        let p_full = project_tangent(&z, &full).unwrap();
        let p_cubic = project_tangent(&z, &cubic).unwrap();
        for (a, b) in p_full.as_slice().iter().zip(p_cubic.as_slice()) {
            assert!(
                (a - b).norm() <= 1e-10 * (1.0 + a.norm()),
                "trial {trial}: penalty gradient forms disagree after projection"
            );
        }
    }
    println!("criterion 07 (projection/retraction invariants, 200 points): PASS");
}

#[test]
fn criterion_08_brute_force_cost_oracle() {
    let theta: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5) * 22.5).collect();
    let cfg = RadarConfig::new(2, 4, 1.0e9, 200.0e6, 0.13, theta).unwrap();
    let mut rng = rng_for(8800);
    let amp_dist = Uniform::new(0.0, 2.0);
    let ph_dist = Uniform::new(0.0, 2.0 * std::f64::consts::PI);
    let amplitudes = Grid::from_fn(8, 4, |_, _| amp_dist.sample(&mut rng));
    let phases = Grid::from_fn(8, 4, |_, _| ph_dist.sample(&mut rng));
    let pattern = DesiredPattern::new(amplitudes, phases).unwrap();
    let cost = assemble_quadratic(&cfg, &pattern).unwrap();

    for trial in 0..100 {
        let x = random_vector(&mut rng, cfg.code_len(), 1.0);
        let (_, f) = cost.cost_value(&x).unwrap();
        // direct double sum of |d·e^{jφ} − aᴴ y_p|²
        let mut brute = 0.0;
        for (ip, &p) in cfg.frequency_bins().iter().enumerate() {
            let y = spectrum_at(&cfg, &x, p).unwrap();
            for (s, &th) in cfg.theta_grid_deg.iter().enumerate() {
                let a = steering_vector(&cfg, th, p).unwrap();
                let mut ay = c(0.0, 0.0);
                for (av, yv) in a.iter().zip(y.iter()) {
                    ay += av.conj() * yv;
                }
                let target =
                    C64::from_polar(pattern.amplitudes().get(s, ip), pattern.phases().get(s, ip));
                brute += (target - ay).norm_sqr();
            }
        }
        assert!(
            (f - brute).abs() <= 1e-8 * brute.abs().max(1.0),
            "trial {trial}: assembled {f} vs brute {brute}"
        );
    }
    println!("criterion 08 (brute-force cost oracle, 100 codes): PASS");
}

#[test]
fn criterion_09_orthogonality_sweep() {
    let configs = bundled_case_configs();
    let cfg = configs[0].radar.to_radar_config().unwrap();
    let scenario = configs[0].scenario.resolve().unwrap();

    // alpha = 200 run at the hand-picked step size for penalised designs
    let params = SolverParams::fixed_step(3.0e-5, 1e-2, 3000);
    let x0 = seeded_code(cfg.code_len(), configs[0].seed);
    let (x_pen, _) =
        design_beampattern_penalized(&cfg, &scenario, &params, 0.0, 100, 200.0, &x0).unwrap();
    let dev_pen = deviation_db(&cfg, &scenario, x_pen.as_slice()).unwrap();
    let xm = WaveformMatrix::from_code(x_pen.as_slice(), cfg.tx_count, cfg.samples).unwrap();
    let isl_pen = isl0_db(&xm);

    // alpha = 0 recovers the plain design behaviour
    let plain_params = configs[0].solver.to_params();
    let (x_plain, trace) = design_beampattern(
        &cfg,
        &scenario,
        &plain_params,
        configs[0].solver.zeta_for(cfg.code_len()),
        configs[0].solver.outer_max,
        &x0,
    )
    .unwrap();
    let dev_plain = deviation_db(&cfg, &scenario, x_plain.as_slice()).unwrap();

    let ok = isl_pen <= -10.0 && dev_pen <= 31.0 && dev_plain <= 24.3;
    println!(
        "criterion 09 (orthogonality sweep): alpha=200 gives isl0 {isl_pen:.2} dB (<= -10) and \
         deviation {dev_pen:.2} dB (<= 31); alpha=0 gives {dev_plain:.2} dB (<= 24.3) in {} steps -> {}",
        trace.total_inner_iterations,
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(isl_pen <= -10.0, "isl0 {isl_pen} dB above -10 dB");
    assert!(
        dev_pen <= 31.0,
        "penalised deviation {dev_pen} dB above 31 dB"
    );
    assert!(
        dev_plain <= 24.3,
        "alpha=0 deviation {dev_plain} dB above 24.3 dB"
    );
}

#[test]
fn criterion_10_lfm_baseline() {
    let lfm = lfm_set(10, 32).unwrap();
    let mut max_err = 0.0f64;
    for v in lfm.to_code() {
        max_err = max_err.max((v.norm() - 1.0).abs());
    }
    let isl = isl0_db(&lfm);
    let ok = max_err <= 2.0 * f64::EPSILON && isl <= -200.0;
    println!(
        "criterion 10 (LFM baseline): max unit-modulus error {max_err:.2e} (<= 2 eps), \
         isl0 {isl:.2} dB (<= -200) -> {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(max_err <= 2.0 * f64::EPSILON);
    assert!(isl <= -200.0);
}

#[test]
fn criterion_11_mismatch_study() {
    let cfg = RadarConfig::standard();
    let setup = MismatchSetup::from_radar(&cfg);
    let n = cfg.samples;

    // general evaluator with R_s = N·I equals N x orthogonal closed form
    let r_s = HermitianMatrix::from_diagonal(&vec![n as f64; setup.tx_count]);
    let theta0 = 125.0;
    for &theta in &cfg.theta_grid_deg {
        let general = g_tr(&setup, &r_s, n, theta, theta0).unwrap();
        let closed = n as f64 * g_tr_orthogonal(&setup, n, theta, theta0);
        assert!(
            (general - closed).abs() <= 1e-9 * closed.abs().max(1e-12),
            "theta {theta}: {general} vs {closed}"
        );
    }

    // closed-form peak losses: orthogonal (LFM) vs coherent
    let steer = setup.theta_steer_deg;
    let peak_at = |theta0: f64, coherent: bool| -> f64 {
        cfg.theta_grid_deg
            .iter()
            .map(|&theta| {
                if coherent {
                    g_tr_coherent(&setup, n, theta, theta0, steer)
                } else {
                    // LFM: R_s from the actual code (exactly N·I)
                    let lfm = lfm_set(setup.tx_count, n).unwrap();
                    let r = correlation_matrix(&lfm, theta0, &setup).unwrap();
                    g_tr(&setup, &r, n, theta, theta0).unwrap()
                }
            })
            .fold(f64::MIN, f64::max)
    };
    let mut ok = true;
    for delta in [10.0, 20.0] {
        let theta0 = steer - delta;
        let lfm_loss = 10.0 * (peak_at(steer, false) / peak_at(theta0, false)).log10();
        let coh_loss = 10.0 * (peak_at(steer, true) / peak_at(theta0, true)).log10();
        println!(
            "criterion 11 (mismatch, delta {delta} deg): lfm loss {lfm_loss:.2} dB (<= 0.5), \
             coherent loss {coh_loss:.2} dB (>= 3)"
        );
        ok &= lfm_loss <= 0.5 && coh_loss >= 3.0;
        assert!(
            lfm_loss <= 0.5,
            "orthogonal loss {lfm_loss} dB at delta {delta}"
        );
        assert!(
            coh_loss >= 3.0,
            "coherent loss {coh_loss} dB at delta {delta}"
        );
    }
    println!(
        "criterion 11 (mismatch study): closed-form agreement at all angles -> {}",
        if ok { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_12_design_determinism() {
    use pdr_radar::commands::cmd_design;
    let tmp = tempfile::tempdir().unwrap();
    let mut config = bundled_case_configs()[0].clone();
    config.solver.outer_max = 3; // identical code path, shorter run
    let mut waveforms = Vec::new();
    for run in 0..2 {
        config.output_dir = tmp.path().join(format!("run{run}"));
        cmd_design(&config).unwrap();
        waveforms.push(std::fs::read(config.output_dir.join("waveform.csv")).unwrap());
    }
    let identical = waveforms[0] == waveforms[1];
    println!(
        "criterion 12 (determinism): two identically-seeded designs give byte-identical \
         waveform files -> {}",
        if identical { "PASS" } else { "FAIL" }
    );
    assert!(identical);
}
