//! Acceptance suite: one test per criterion, each pinned to its stated
//! tolerance. The per-test `ok`/`FAILED` line is the pass/fail record; the
//! printed summaries carry the measured numbers.

use num_complex::Complex64;
use speclab::bounds;
use speclab::harmonic::{self, fd, lemmas, walk, PieceId, PlanarDomain};
use speclab::multiscale::{self, ProbeParams, ScaleParams, UpsilonMode};
use speclab::operator::{identity_coupling, ChannelSpace, MatrixPotential, SourceProfile, SpectralParameter};
use speclab::quadrature::simpson_fn;
use speclab::solver::{default_grid, free_greens_function, greens_column};
use speclab::spectral;
use speclab::{Interval, Verdict};
use std::f64::consts::PI;

fn scalar() -> ChannelSpace {
    ChannelSpace::new(1).unwrap()
}

fn free_potential() -> MatrixPotential {
    MatrixPotential::zero(scalar())
}

fn power_law(lambda: f64, gamma: f64, support: f64) -> MatrixPotential {
    MatrixPotential::power_law(scalar(), lambda, gamma, support, identity_coupling(1)).unwrap()
}

/// Grid reaching past both evaluation radii with the wavelength margin.
fn greens_grid(step: f64, r: f64, rho: f64, k: Complex64) -> speclab::grid::RadialGrid {
    let margin = (4.0 * PI / k.norm()).min(16.0);
    let reach = r.max(rho).max(2.0) + margin;
    speclab::grid::RadialGrid::covering(step, reach).unwrap()
}

#[test]
fn acceptance_01_free_kernel_oracle() {
    let v = free_potential();
    let ks = [
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(1.0, 0.5),
        Complex64::new(0.0, 1.0), // z = -1, below the spectrum
    ];
    let pairs = [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (1.5, 0.5)];
    let mut triples = 0;
    let mut max_rel = [0.0_f64; 3];
    let steps = [1e-3, 5e-4, 2.5e-4];
    let mut per_triple_errors: Vec<[f64; 3]> = Vec::new();
    for &k in &ks {
        for &(r, rho) in &pairs {
            let exact = free_greens_function(r, rho, k);
            assert!(exact.norm() > 1e-2, "oracle value too small at k={k}, ({r},{rho})");
            let mut errs = [0.0_f64; 3];
            for (lvl, &h) in steps.iter().enumerate() {
                let grid = greens_grid(h, r, rho, k);
                let kp = SpectralParameter::from_k(k).unwrap();
                let col = greens_column(&v, kp, rho, &grid).unwrap();
                let got = col.block(grid.nearest_node(r))[(0, 0)];
                let rel = (got - exact).norm() / exact.norm();
                errs[lvl] = rel;
                max_rel[lvl] = max_rel[lvl].max(rel);
            }
            per_triple_errors.push(errs);
            triples += 1;
        }
    }
    assert_eq!(triples, 20);
    println!(
        "criterion 1: max relative error at h=1e-3: {:.3e} (h/2: {:.3e}, h/4: {:.3e})",
        max_rel[0], max_rel[1], max_rel[2]
    );
    assert!(max_rel[0] <= 1e-4, "max relative error {} exceeds 1e-4", max_rel[0]);
    // convergence order per triple under two halvings
    let mut orders = Vec::new();
    for errs in &per_triple_errors {
        if errs[0] > 1e-12 && errs[1] > 1e-13 && errs[2] > 1e-14 {
            orders.push((errs[0] / errs[1]).log2());
            orders.push((errs[1] / errs[2]).log2());
        }
    }
    let mean_order: f64 = orders.iter().sum::<f64>() / orders.len() as f64;
    println!("criterion 1: mean observed order {mean_order:.2} over {} ratios", orders.len());
    assert!(mean_order >= 1.7, "observed order {mean_order} below 1.7");
}

#[test]
fn acceptance_02_density_cross_oracle() {
    let cases = [
        ("free", free_potential()),
        ("power-law", power_law(0.5, 0.8, 64.0)),
    ];
    let f = SourceProfile::indicator(scalar());
    let etas = [1e-2, 5e-3, 2.5e-3];
    let ks = [1.0, PI, 2.0, 3.0];
    for (name, v) in &cases {
        for &k in &ks {
            let kp = SpectralParameter::real_axis(k).unwrap();
            let grid = default_grid(v, kp, 1e-3).unwrap();
            let boundary = spectral::density_via_boundary(v, &f, k, &grid).unwrap();
            let kz = SpectralParameter::from_z(Complex64::new(k * k, etas[0])).unwrap();
            let sgrid = default_grid(v, kz, 1e-3).unwrap();
            let st = spectral::density_via_stieltjes(v, &f, k * k, &etas, &sgrid).unwrap();
            let rel = (st.extrapolated - boundary.density).abs() / boundary.density;
            println!(
                "criterion 2: {name} k={k:.4}: boundary {:.8e} stieltjes {:.8e} rel {:.2e}",
                boundary.density, st.extrapolated, rel
            );
            assert!(rel <= 1e-3, "{name} k={k}: cross-oracle gap {rel}");
        }
    }
    // frozen closed-form value at k = π for the free case
    let v = free_potential();
    let kp = SpectralParameter::real_axis(PI).unwrap();
    let grid = default_grid(&v, kp, 1e-3).unwrap();
    let s = spectral::density_via_boundary(&v, &f, PI, &grid).unwrap();
    let exact = 4.0 / PI.powi(4);
    println!("criterion 2: free density at pi: {} vs 4/pi^4 = {exact}", s.density);
    assert!((s.density - exact).abs() <= 1e-4);
}

#[test]
fn acceptance_03_energy_identity() {
    let f = SourceProfile::indicator(scalar());
    let free = free_potential();
    let pl = power_law(0.5, 0.8, 8.0);
    let configs: [(&MatrixPotential, Complex64, f64, f64); 6] = [
        (&free, Complex64::new(1.0, 0.1), 2.0, 4.0),
        (&free, Complex64::new(2.0, 0.2), 1.5, 3.0),
        (&free, Complex64::new(1.5, 0.05), 2.5, 6.0),
        (&pl, Complex64::new(1.0, 0.1), 2.0, 4.0),
        (&pl, Complex64::new(2.0, 0.2), 1.5, 3.0),
        (&pl, Complex64::new(1.5, 0.05), 2.5, 6.0),
    ];
    for (i, (v, k, a, b)) in configs.iter().enumerate() {
        let kp = SpectralParameter::from_k(*k).unwrap();
        let grid = default_grid(v, kp, 1e-3).unwrap();
        let rep = bounds::check_energy_identity_refined(v, &f, kp, *a, *b, &grid, 3).unwrap();
        println!(
            "criterion 3: config {i}: residual {:.3e}, orders {:?}, verdict {}",
            rep.residuals[0].residual, rep.orders, rep.verdict
        );
        assert!(rep.residuals[0].residual <= 1e-4);
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}

#[test]
fn acceptance_04_pc_zone_stability_trend() {
    let v = power_law(0.5, 0.8, 2.0_f64.powi(12));
    let f = SourceProfile::indicator(scalar());
    let interval = Interval::new(1.0, 2.0).unwrap();
    let mut probe = ProbeParams::new(0.8);
    probe.x_samples = 6;
    probe.y_samples = 3;
    probe.grid_step = 1e-2;
    let mut pairs = Vec::new();
    let mut prev = f64::INFINITY;
    for n in [6_u32, 7, 8, 9] {
        let rep = multiscale::pc_stability_probe(&v, &f, interval, n, &probe).unwrap();
        println!("criterion 4: T=2^{n}: eps_T = {:.6}", rep.eps_t_max);
        assert!(rep.eps_t_max > 0.0, "eps_T must be positive");
        assert!(rep.eps_t_max < prev, "eps_T must decrease at T=2^{n}");
        prev = rep.eps_t_max;
        pairs.push((rep.t_n, rep.eps_t_max));
    }
    let slope = speclab::fit::log_log_slope(&pairs).unwrap();
    println!("criterion 4: log-log fitted exponent {slope:.3}");
    assert!(slope < 0.0, "log-log fit exponent {slope} not negative");

    // V ≡ 0 control: ratios at solver-roundoff level (tolerance 1e-12)
    let v0 = free_potential();
    let rep = multiscale::pc_stability_probe(&v0, &f, interval, 6, &probe).unwrap();
    println!("criterion 4: free control eps_T = {:.3e}", rep.eps_t_max);
    assert!(rep.eps_t_max <= 10.0 * 1e-12, "free control eps_T {}", rep.eps_t_max);
}

#[test]
fn acceptance_05_multiscale_boundedness() {
    let f = SourceProfile::indicator(scalar());
    let interval = Interval::new(1.0, 2.0).unwrap();
    // Boundedness is a statement about the truncation dependence of ψ, so
    // both the family and its control run with frozen geometry: the
    // desk-scale shrink υ' moves the interval by ~45% over five scales,
    // which is a pure-geometry effect the V ≡ 0 control would also see.
    let mut params = ScaleParams::new(0.8, 0.5, UpsilonMode::DeskScale).unwrap();
    params.grid_step = 1e-2;
    params.freeze_geometry = true;

    // main family: γ = 0.8, λ = 0.5, scales n = 6…10
    let v = power_law(0.5, 0.8, 2.0_f64.powi(12));
    let mut state = multiscale::begin_iteration(&v, &f, interval, 6, &params).unwrap();
    let mut a_values = vec![state.a_n];
    let mut b_values = vec![state.b_n];
    let mut flagged = state.flags.iter().any(|fl| fl.starts_with("log-zero"));
    for _ in 7..=10 {
        state = multiscale::advance_scale(&state, &v, &f, &params).unwrap();
        a_values.push(state.a_n);
        b_values.push(state.b_n);
        flagged |= state.flags.iter().any(|fl| fl.starts_with("log-zero"));
    }
    let a_min = a_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_max = a_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variation = (a_max - a_min) / a_min;
    let b_min = b_values.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("criterion 5: A_n = {a_values:?}");
    println!("criterion 5: B_n = {b_values:?}");
    println!("criterion 5: A variation {variation:.3}, min B {b_min:.4}");
    assert!(variation < 0.5, "A_n varies by {variation}");
    assert!(b_min.is_finite(), "B_n hit -inf");
    assert!(!flagged, "log-zero flags raised");

    // V ≡ 0 control: only the truncation scale moves, so nothing may drift
    let control = params.clone();
    let v0 = free_potential();
    let mut st = multiscale::begin_iteration(&v0, &f, interval, 6, &control).unwrap();
    let (a0, b0) = (st.a_n, st.b_n);
    for _ in 7..=10 {
        st = multiscale::advance_scale(&st, &v0, &f, &control).unwrap();
        assert!(
            (st.a_n - a0).abs() <= 1e-3 * a0.abs(),
            "free control A drifted: {} vs {a0}",
            st.a_n
        );
        assert!(
            (st.b_n - b0).abs() <= 1e-3 * b0.abs().max(1e-6),
            "free control B drifted: {} vs {b0}",
            st.b_n
        );
    }
    println!("criterion 5: free control constant: A = {a0:.8}, B = {b0:.8}");
}

#[test]
fn acceptance_06_harmonic_measure_battery() {
    let eps = 1.0;
    let cut = 6.0;
    let domain = PlanarDomain::cylinder(eps, cut).unwrap();
    let poles = [
        Complex64::new(0.0, 0.3),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.0, 0.7),
        Complex64::new(0.4, 0.5),
    ];
    let offsets = [0.0, 0.7, -1.1];
    let meshes = [1.0 / 32.0, 1.0 / 64.0];
    let lower = domain.piece_segment(PieceId::Lower);

    // grid densities at two meshes vs the exact kernel; the mesh-order
    // error of the extraction is gauged by the largest relative refinement
    // delta across the battery (per-pair deltas can cancel at sign
    // crossovers of the error)
    let mut ops = Vec::new();
    for &mesh in &meshes {
        ops.push(fd::LaplaceOperator::new(&domain, mesh).unwrap());
    }
    let mut rows = Vec::new();
    let mut gauge: f64 = 1e-4;
    for &pole in &poles {
        let samples: Vec<fd::BoundarySample> = offsets
            .iter()
            .map(|&x| fd::BoundarySample {
                piece: PieceId::Lower,
                t: (x + cut) / (2.0 * cut),
            })
            .collect();
        let coarse = fd::boundary_density_by_green(&ops[0], pole, &samples).unwrap();
        let fine = fd::boundary_density_by_green(&ops[1], pole, &samples).unwrap();
        for ((&x, dc), df) in offsets.iter().zip(&coarse).zip(&fine) {
            let exact = harmonic::cylinder_density(eps, pole, x);
            gauge = gauge.max((dc - df).abs() / exact);
            rows.push((pole, x, *df, exact));
        }
    }
    assert_eq!(rows.len(), 12);
    println!("criterion 6: mesh-order relative gauge {gauge:.3e}");
    for (pole, x, df, exact) in rows {
        let rel = (df - exact).abs() / exact;
        println!("criterion 6: pole {pole}, t {x}: exact {exact:.6} grid {df:.6} rel {rel:.2e}");
        assert!(rel <= 4.0 * gauge, "fine-grid density off: rel {rel} > 4x{gauge}");
    }

    // walk-on-spheres windows within 3σ of the exact window mean
    let walkers = 100_000;
    let w = 0.1;
    for (i, &pole) in poles.iter().enumerate() {
        for (j, &x) in offsets.iter().enumerate() {
            let t_mid = (x + cut) / (2.0 * cut);
            let dt = w / lower.length();
            let (mass, sigma, unabsorbed) = walk::arc_mass_by_walk(
                &domain,
                pole,
                PieceId::Lower,
                t_mid - dt / 2.0,
                t_mid + dt / 2.0,
                walkers,
                1000 + (i * 3 + j) as u64,
            )
            .unwrap();
            assert_eq!(unabsorbed, 0);
            let mc_density = mass / w;
            let exact_mean = simpson_fn(
                |t| harmonic::cylinder_density(eps, pole, t),
                x - w / 2.0,
                x + w / 2.0,
                201,
            ) / w;
            let gap = (mc_density - exact_mean).abs();
            println!(
                "criterion 6: MC pole {pole}, t {x}: {mc_density:.5} vs {exact_mean:.5} (3σ = {:.5})",
                3.0 * sigma / w
            );
            assert!(gap <= 3.0 * sigma / w + 1e-4, "MC window off by {gap}");
        }
    }

    // total masses and the lower-side reference value at pole i/2
    let grid_ests = fd::measure_by_grid(&domain, &poles, meshes[1]).unwrap();
    for est in &grid_ests {
        assert!((est.total_mass() - 1.0).abs() <= 1e-3, "grid mass {}", est.total_mass());
    }
    let mc = walk::measure_by_walk(&domain, Complex64::new(0.0, 0.5), walkers, 77).unwrap();
    println!(
        "criterion 6: total MC mass {} (unabsorbed {}), lower {}",
        mc.total_mass(),
        mc.unabsorbed,
        mc.mass_of(PieceId::Lower)
    );
    assert!((mc.total_mass() - 1.0).abs() <= 1e-2);
    let grid_half = grid_ests[1].mass_of(PieceId::Lower);
    assert!((grid_half - 0.5).abs() <= 1e-3, "grid lower mass {grid_half}");
    let sigma = mc.error_of(PieceId::Lower);
    assert!(
        (mc.mass_of(PieceId::Lower) - 0.5).abs() <= 3.0 * sigma + 1e-3,
        "MC lower mass {}",
        mc.mass_of(PieceId::Lower)
    );
}

#[test]
fn acceptance_07_trapezoid_bounds() {
    // deep-thin geometry: the constant-free lower-base bound and the
    // upper-base constant
    let eps = 0.04;
    let poles = [
        Complex64::new(0.6, 0.012),
        Complex64::new(1.0, 0.018),
        Complex64::new(1.4, 0.015),
    ];
    let coarse = lemmas::check_trapezoid_bounds(eps, 3.0, 0.25, eps / 32.0, &poles).unwrap();
    let fine = lemmas::check_trapezoid_bounds(eps, 3.0, 0.25, eps / 64.0, &poles).unwrap();
    for rep in [&coarse, &fine] {
        let lower = rep.piece(PieceId::Lower).max_ratio;
        println!("criterion 7: mesh {:.5}: lower-base max ratio {lower:.4}", rep.mesh);
        assert!(lower <= 1.0 + 0.05, "lower-base ratio {lower} at mesh {}", rep.mesh);
    }
    {
        let c = coarse.piece(PieceId::Upper).max_ratio;
        let fr = fine.piece(PieceId::Upper).max_ratio;
        let drift = (c - fr).abs() / fr;
        println!("criterion 7: upper: constants {c:.4} -> {fr:.4} (drift {drift:.3})");
        assert!(drift < 0.2, "upper constant drifts by {drift}");
    }
    // In the deep-thin regime the leg measure from admissible poles sits
    // under e^{-πδ/ε} ≈ 3e-9, below the mesh-error floor, so leg ratios
    // are vacuous there. The leg constants are checked on a resolvable
    // channel (ε = 0.3 < δ² = 0.3025): the right-leg bound is stated for
    // poles with x < 1, so those sit a full channel length away and need
    // the thicker geometry to register above the solver floor.
    let eps2 = 0.3;
    let poles2 = [Complex64::new(0.9, 0.1), Complex64::new(0.98, 0.12)];
    let coarse2 = lemmas::check_trapezoid_bounds(eps2, 3.0, 0.55, eps2 / 32.0, &poles2).unwrap();
    let fine2 = lemmas::check_trapezoid_bounds(eps2, 3.0, 0.55, eps2 / 64.0, &poles2).unwrap();
    for piece in [PieceId::Left, PieceId::Right] {
        let cp = coarse2.piece(piece);
        let fp = fine2.piece(piece);
        assert_eq!(cp.unresolved, 0, "{piece} has unresolved samples");
        assert_eq!(fp.unresolved, 0, "{piece} has unresolved samples");
        let drift = (cp.max_ratio - fp.max_ratio).abs() / fp.max_ratio;
        println!(
            "criterion 7: {piece}: constants {:.4} -> {:.4} (drift {drift:.3})",
            cp.max_ratio, fp.max_ratio
        );
        assert!(fp.max_ratio > 0.0);
        assert!(drift < 0.2, "{piece} constant drifts by {drift}");
    }
}

#[test]
fn acceptance_08_combes_thomas() {
    // ‖V‖_∞ = 0.1, Im k = 1: slope at most -0.5·Im k
    let v = power_law(0.1, 0.8, 8.0);
    let k = SpectralParameter::from_k(Complex64::new(1.0, 1.0)).unwrap();
    let seps: Vec<f64> = (1..=10).map(|i| 0.8 * i as f64).collect();
    let fit = bounds::check_combes_thomas(&v, k, 2.0, &seps, 5e-3, 4.0).unwrap();
    println!(
        "criterion 8: slope {:.4} (target {:.4}), decades {:.1}",
        fit.slope, fit.target_rate, fit.decades_spanned
    );
    assert!(fit.slope <= -0.5 + 0.05, "slope {}", fit.slope);
    assert_eq!(fit.verdict, Verdict::Pass);

    // windowed variant: positive empirical c stable within 30% over T
    let mut cs = Vec::new();
    for n in [6_i32, 7, 8] {
        let t = 2.0_f64.powi(n);
        let vt = power_law(1.0, 0.8, t);
        let im_k = 16.0 * t.powf(-0.8);
        let kp = SpectralParameter::from_k(Complex64::new(1.0, im_k)).unwrap();
        let rep = bounds::check_windowed_decay(&vt, kp, None, 10, 1e-2).unwrap();
        assert!(!rep.skipped, "gate unexpectedly skipped at T=2^{n}");
        let c = rep.c_empirical.unwrap();
        println!("criterion 8: windowed T=2^{n}: c = {c:.4}");
        assert!(c > 0.0);
        cs.push(c);
    }
    let c_min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_max = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (c_max - c_min) / c_min;
    println!("criterion 8: windowed c spread {spread:.3}");
    assert!(spread <= 0.3, "windowed constant spread {spread}");
}

#[test]
fn acceptance_09_subharmonic_mean_value() {
    let domain = PlanarDomain::rectangle(Interval::new(0.5, 2.5).unwrap(), 0.5).unwrap();
    let poles = [Complex64::new(1.3, 0.22), Complex64::new(1.9, 0.31)];
    let pl = power_law(0.5, 0.8, 16.0);
    let src = SourceProfile::indicator(scalar());
    let h1 = lemmas::ConstantSampler(2.0);
    let h2 = lemmas::EssentialSingularitySampler { x0: 0.2 };
    let h3 = lemmas::ZeroAtSampler { k0: Complex64::new(1.0, 0.1) };
    let h4 = lemmas::TwoChannelSampler { a: 0.7, b: 1.3 };
    let h5 = lemmas::PsiInfinitySampler {
        potential: &pl,
        source: &src,
        center: 0.0,
        scale: 1.0,
        grid_step: 1e-2,
    };
    let samplers: [(&str, &dyn lemmas::HolomorphicSampler); 5] = [
        ("constant", &h1),
        ("essential-singularity", &h2),
        ("zero", &h3),
        ("two-channel", &h4),
        ("psi-infinity", &h5),
    ];
    for (name, h) in samplers {
        for &pole in &poles {
            let coarse = lemmas::mean_value_check(&domain, 1.0 / 64.0, pole, h).unwrap();
            let fine = lemmas::mean_value_check(&domain, 1.0 / 128.0, pole, h).unwrap();
            let tol = 4.0 * (coarse.boundary_integral - fine.boundary_integral).abs() + 1e-3;
            println!(
                "criterion 9: {name} at {pole}: lhs {:.5} rhs {:.5} slack {:.5} (tol {:.2e})",
                fine.lhs, fine.boundary_integral, fine.slack, tol
            );
            assert!(
                fine.lhs <= fine.boundary_integral + tol,
                "{name} at {pole}: mean-value violated by {}",
                fine.lhs - fine.boundary_integral
            );
            assert!((fine.mass_sum - 1.0).abs() < 0.02, "mass {}", fine.mass_sum);
        }
    }
}

#[test]
fn acceptance_10_determinism() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_speclab");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
master_seed = 7

[potential]
kind = "power-law"
lambda = 0.5
gamma = 0.8
T = 16.0

[grid]
step = 0.002

[k]
values = [[1.5, 0.1]]

[harmonic]
poles = [[0.0, 0.5]]
walkers = 20000
mesh = 0.03125

[harmonic.domain]
kind = "cylinder"
epsilon = 1.0
cut = 6.0
"#,
    )
    .unwrap();
    for command in ["solve", "harmonic"] {
        let first = dir.path().join(format!("{command}_a"));
        let status = Command::new(bin)
            .args([command, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&first)
            .status()
            .unwrap();
        assert!(status.success(), "{command} failed");
        let second = dir.path().join(format!("{command}_b"));
        let status = Command::new(bin)
            .args(["rerun"])
            .arg(first.join("manifest.json"))
            .arg("--out")
            .arg(&second)
            .status()
            .unwrap();
        assert!(status.success(), "rerun of {command} failed");
        let mut names: Vec<_> = std::fs::read_dir(&first)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(first.join(&name)).unwrap();
            let b = std::fs::read(second.join(&name)).unwrap();
            assert_eq!(a, b, "{command}: {name:?} differs between run and rerun");
        }
        println!("criterion 10: {command} rerun is byte-identical");
    }
}
