//! Command implementations. Each command resolves its configuration,
//! computes, writes deterministic outputs through the atomic writer, and
//! finishes with a manifest. Sample order in every file follows the
//! declared order in the config, never completion order.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde_json::json;

use speclab::bounds;
use speclab::harmonic::{self, fd, walk, PieceId};
use speclab::multiscale::{self, ProbeParams, ScaleParams, UpsilonMode};
use speclab::operator::SpectralParameter;
use speclab::solver::{default_grid, solve_driven};
use speclab::spectral;
use speclab::{Interval, Verdict};

use crate::config::{to_complex, RunConfig};
use crate::manifest::RunWriter;

/// Executes `command`; returns false when a requested check failed (the
/// caller maps that to a nonzero exit).
pub fn execute(command: &str, config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    match command {
        "solve" => cmd_solve(config, out_dir),
        "density" => cmd_density(config, out_dir),
        "entropy" => cmd_entropy(config, out_dir),
        "iterate" => cmd_iterate(config, out_dir),
        "verify" => cmd_verify(config, out_dir),
        "harmonic" => cmd_harmonic(config, out_dir),
        other => bail!("unknown command '{other}'"),
    }
}

fn build_grid(
    config: &RunConfig,
    potential: &speclab::operator::MatrixPotential,
    k: SpectralParameter,
) -> anyhow::Result<speclab::grid::RadialGrid> {
    let gc = config.grid_or_default();
    Ok(match gc.right_end {
        Some(r) => speclab::grid::RadialGrid::new(gc.step, r)?,
        None => default_grid(potential, k, gc.step)?,
    })
}

fn cmd_solve(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let pc = config.potential()?;
    let potential = pc.build()?;
    let source = config.source_or_default().build(potential.channels())?;
    let ks = config.k.clone().context("solve needs a [k] section")?;
    if ks.values.is_empty() {
        bail!("k.values must not be empty");
    }
    let mut writer = RunWriter::new(out_dir)?;
    for (i, pair) in ks.values.iter().enumerate() {
        let k = SpectralParameter::from_k(to_complex(*pair))?;
        let grid = build_grid(config, &potential, k)?;
        let sol = solve_driven(&potential, &source, k, &grid)?;
        let mut buf = Vec::new();
        sol.write_csv(&mut buf)?;
        writer.write(&format!("solution_{i:03}.csv"), &buf)?;
    }
    writer.finish("solve", config)?;
    Ok(true)
}

fn cmd_density(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let pc = config.potential()?;
    let potential = pc.build()?;
    let source = config.source_or_default().build(potential.channels())?;
    let dc = config.density.clone().context("density needs a [density] section")?;
    let mut csv = String::from("k,e,density,psi_norm_sq\n");
    let mut jsonl = String::new();
    for &k in &dc.k_values {
        let kp = SpectralParameter::real_axis(k)?;
        let grid = build_grid(config, &potential, kp)?;
        let s = spectral::density_via_boundary(&potential, &source, k, &grid)?;
        writeln!(csv, "{},{},{},{}", s.k, s.e, s.density, s.psi_norm_sq)?;
        if dc.stieltjes {
            let kz = SpectralParameter::from_z(Complex64::new(k * k, dc.etas[0]))?;
            let sgrid = build_grid(config, &potential, kz)?;
            let rep = spectral::density_via_stieltjes(&potential, &source, k * k, &dc.etas, &sgrid)?;
            let rel = (rep.extrapolated - s.density).abs() / s.density.abs().max(1e-300);
            let mut record = serde_json::to_value(&rep)?;
            record["boundary_density"] = json!(s.density);
            record["relative_gap"] = json!(rel);
            writeln!(jsonl, "{record}")?;
        }
    }
    let mut writer = RunWriter::new(out_dir)?;
    writer.write("density.csv", csv.as_bytes())?;
    if dc.stieltjes {
        writer.write("stieltjes.jsonl", jsonl.as_bytes())?;
    }
    writer.finish("density", config)?;
    Ok(true)
}

fn cmd_entropy(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let pc = config.potential()?;
    let potential = pc.build()?;
    let source = config.source_or_default().build(potential.channels())?;
    let ec = config.entropy.clone().context("entropy needs an [entropy] section")?;
    let interval = Interval::new(ec.interval[0], ec.interval[1])?;
    let variable = match ec.variable.as_str() {
        "k" => spectral::EntropyVariable::K,
        "E" => spectral::EntropyVariable::E,
        other => bail!("entropy.variable: unknown variable '{other}'"),
    };
    let rep = spectral::entropy_integral_in(
        &potential,
        &source,
        interval,
        ec.nodes,
        config.grid_or_default().step,
        ec.zero_floor,
        variable,
    )?;
    let record = json!({
        "interval": [interval.left(), interval.right()],
        "variable": rep.variable.to_string(),
        "nodes": rep.node_count,
        "value": finite_or_string(rep.value),
        "log_plus": finite_or_string(rep.log_plus),
        "log_minus": finite_or_string(rep.log_minus),
        "offending_nodes": rep.offending_nodes,
        "zero_floor": rep.zero_floor,
    });
    let mut writer = RunWriter::new(out_dir)?;
    writer.write("entropy.jsonl", format!("{record}\n").as_bytes())?;
    let mut csv = String::from("k,e,density,psi_norm_sq\n");
    for d in &rep.densities {
        writeln!(csv, "{},{},{},{}", d.k, d.e, d.density, d.psi_norm_sq)?;
    }
    writer.write("densities.csv", csv.as_bytes())?;
    writer.finish("entropy", config)?;
    Ok(true)
}

fn finite_or_string(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn cmd_iterate(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let pc = config.potential()?;
    let potential = pc.build()?;
    let source = config.source_or_default().build(potential.channels())?;
    let ic = config.iterate.clone().context("iterate needs an [iterate] section")?;
    let interval = Interval::new(ic.interval[0], ic.interval[1])?;
    let mode = match ic.upsilon_mode.as_str() {
        "analytic" => UpsilonMode::Analytic,
        "desk-scale" => UpsilonMode::DeskScale,
        other => bail!("iterate.upsilon_mode: unknown mode '{other}'"),
    };
    let mut params = ScaleParams::new(pc.gamma, ic.upsilon, mode)?;
    if let Some(d1) = ic.delta1 {
        params.delta1 = d1;
    }
    params.y_count = ic.y_count;
    params.x_count = ic.x_count;
    params.grid_step = config.grid_or_default().step;
    params.freeze_geometry = ic.freeze_geometry;
    params.validate()?;

    let probe_params = ProbeParams {
        delta1: params.delta1,
        x_samples: 6,
        y_samples: 3,
        grid_step: params.grid_step,
    };

    let mut jsonl = String::new();
    let mut state = multiscale::begin_iteration(&potential, &source, interval, ic.n0, &params)?;
    for n in ic.n0..=ic.n_max {
        if n > ic.n0 {
            state = multiscale::advance_scale(&state, &potential, &source, &params)?;
        }
        let (eps_t, eps_prime_max) = if ic.probe && n >= 1 {
            let rep = multiscale::pc_stability_probe(&potential, &source, state.interval, n, &probe_params)?;
            (json!(rep.eps_t_max), json!(rep.eps_prime_max))
        } else {
            (json!(null), json!(null))
        };
        let record = json!({
            "n": state.n,
            "t_n": state.t_n,
            "ell": state.zone_lower,
            "big_l": state.zone_upper,
            "interval": [state.interval.left(), state.interval.right()],
            "a_n": state.a_n,
            "b_n": finite_or_string(state.b_n),
            "eps_t": eps_t,
            "eps_prime_max": eps_prime_max,
            "flags": state.flags,
        });
        writeln!(jsonl, "{record}")?;
    }
    let mut writer = RunWriter::new(out_dir)?;
    writer.write("scales.jsonl", jsonl.as_bytes())?;
    writer.finish("iterate", config)?;
    Ok(true)
}

fn cmd_verify(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let vc = config.verify.clone().unwrap_or_else(|| {
        toml::from_str("").expect("empty verify config has defaults")
    });
    let pc = config.potential()?;
    let potential = pc.build()?;
    let source = config.source_or_default().build(potential.channels())?;
    let step = config.grid_or_default().step;
    let interval = Interval::new(vc.interval[0], vc.interval[1])?;

    let all = vc.checks.iter().any(|c| c == "all");
    let wants = |name: &str| all || vc.checks.iter().any(|c| c == name);
    let mut jsonl = String::new();
    let mut all_pass = true;
    let mut record = |value: serde_json::Value, verdict: Verdict| {
        if !verdict.passed() {
            all_pass = false;
        }
        jsonl.push_str(&value.to_string());
        jsonl.push('\n');
    };

    if wants("energy-identity") {
        let k = SpectralParameter::from_k(to_complex(vc.k))?;
        let grid = default_grid(&potential, k, step)?;
        let rep = bounds::check_energy_identity_refined(
            &potential, &source, k, vc.ab[0], vc.ab[1], &grid, 3,
        )?;
        record(
            json!({
                "check": "energy-identity",
                "params": {"k": vc.k, "a": vc.ab[0], "b": vc.ab[1], "step": step},
                "residual": rep.residuals[0].residual,
                "order": rep.orders,
                "verdict": rep.verdict,
            }),
            rep.verdict,
        );
    }
    if wants("rough-bound") {
        let coarse = bounds::check_rough_bound(&potential, &source, interval, vc.alpha, 3, 3, step)?;
        let fine = bounds::check_rough_bound(&potential, &source, interval, vc.alpha, 6, 6, step)?;
        let verdict = bounds::rough_bound_stability(&coarse, &fine);
        record(
            json!({
                "check": "rough-bound",
                "params": {"alpha": vc.alpha, "interval": vc.interval, "step": step},
                "constant": {"log_coarse": coarse.log_constant, "log_fine": fine.log_constant},
                "verdict": verdict,
            }),
            verdict,
        );
    }
    if wants("convolution") {
        // closed-form pair: A = χ_{[a,a+1]}e₁ with its explicit antiderivative
        let k = {
            let kk = to_complex(vc.k);
            if kk.im > 0.0 {
                kk
            } else {
                Complex64::new(kk.re, 0.5)
            }
        };
        let a0 = 2.0;
        let y = move |r: f64| {
            let val = if (a0..=a0 + 1.0).contains(&r) {
                Complex64::from(1.0)
                    - (Complex64::i() * k * Complex64::from(2.0 * (a0 + 1.0 - r))).exp()
            } else if r < a0 {
                (Complex64::i() * k * Complex64::from(2.0 * (a0 - r))).exp()
                    * (Complex64::from(1.0) - (Complex64::i() * k * Complex64::from(2.0)).exp())
            } else {
                Complex64::default()
            };
            nalgebra::DVector::from_vec(vec![val])
        };
        let a_fn = move |r: f64| {
            nalgebra::DVector::from_vec(vec![if (a0..=a0 + 1.0).contains(&r) {
                Complex64::from(1.0)
            } else {
                Complex64::default()
            }])
        };
        let rep = bounds::check_convolution_lemma(
            &y,
            &a_fn,
            k,
            (a0, a0 + 12.0),
            1e-3,
            &[a0 + 0.25, a0 + 0.5, a0 + 0.75],
        )?;
        record(
            json!({
                "check": "convolution",
                "params": {"k": [k.re, k.im]},
                "constant": {"c_sup": rep.c_sup, "c_l2": rep.c_l2},
                "representation_errors": rep.representation_errors,
                "verdict": rep.verdict,
            }),
            rep.verdict,
        );
    }
    if wants("combes-thomas") {
        let k = {
            let kk = to_complex(vc.k);
            if kk.im > vc.threshold_factor * pc.lambda {
                kk
            } else {
                Complex64::new(kk.re, vc.threshold_factor * pc.lambda + 1.0)
            }
        };
        let kp = SpectralParameter::from_k(k)?;
        let seps: Vec<f64> = (1..=10).map(|i| 0.6 * i as f64).collect();
        // fitted slope must be grid-converged, not just below target
        let fit = bounds::check_combes_thomas(&potential, kp, 2.0, &seps, step, vc.threshold_factor)?;
        let fine = bounds::check_combes_thomas(&potential, kp, 2.0, &seps, step / 2.0, vc.threshold_factor)?;
        let drift = (fit.slope - fine.slope).abs() / fine.slope.abs().max(1e-12);
        let verdict = match (fit.verdict, fine.verdict) {
            (Verdict::Pass, Verdict::Pass) if drift < 0.2 => Verdict::Pass,
            (Verdict::Pass, Verdict::Pass) => Verdict::Inconclusive,
            _ => Verdict::Fail,
        };
        record(
            json!({
                "check": "combes-thomas",
                "params": {"k": [k.re, k.im], "rho": 2.0, "threshold_factor": vc.threshold_factor},
                "constant": {"slope": fit.slope, "slope_refined": fine.slope, "target": fit.target_rate},
                "order": fit.decades_spanned,
                "verdict": verdict,
            }),
            verdict,
        );
    }
    if wants("windowed-decay") {
        let gamma = pc.gamma;
        let t = pc.t;
        let im_k = 16.0 * t.powf(-gamma);
        let kp = SpectralParameter::from_k(Complex64::new(1.0, im_k))?;
        let rep = bounds::check_windowed_decay(&potential, kp, vc.c1, 10, step)?;
        let rep_fine = bounds::check_windowed_decay(&potential, kp, vc.c1, 10, step / 2.0)?;
        let verdict = match (&rep.skipped, &rep.c_empirical, &rep_fine.c_empirical) {
            (true, _, _) => Verdict::Inconclusive,
            (false, Some(c), Some(cf)) if *c > 0.0 && *cf > 0.0 => {
                if (c - cf).abs() / cf.abs() < 0.2 {
                    Verdict::Pass
                } else {
                    Verdict::Inconclusive
                }
            }
            _ => Verdict::Fail,
        };
        record(
            json!({
                "check": "windowed-decay",
                "params": {"t": t, "im_k": im_k, "c1": vc.c1, "threshold": rep.threshold},
                "constant": {"c": rep.c_empirical, "c_refined": rep_fine.c_empirical},
                "skipped": rep.skipped,
                "verdict": verdict,
            }),
            verdict,
        );
    }

    let mut writer = RunWriter::new(out_dir)?;
    writer.write("verdicts.jsonl", jsonl.as_bytes())?;
    writer.finish("verify", config)?;
    Ok(all_pass)
}

fn cmd_harmonic(config: &RunConfig, out_dir: &Path) -> anyhow::Result<bool> {
    let hc = config.harmonic.clone().context("harmonic needs a [harmonic] section")?;
    let domain = hc.domain.build()?;
    let poles: Vec<Complex64> = hc.poles.iter().map(|p| to_complex(*p)).collect();
    for &p in &poles {
        if !domain.contains(p) {
            bail!("pole {p} is not interior to the domain");
        }
    }
    let mut masses = String::from("domain,method,pole_re,pole_im,piece,mass,error\n");
    let mut densities = String::from("domain,method,pole_re,pole_im,piece,t,position,density\n");
    let is_cylinder = matches!(domain.kind, harmonic::DomainKind::Cylinder { .. });
    let lower = domain.piece_segment(PieceId::Lower);

    for method in &hc.methods {
        match method.as_str() {
            "exact" => {
                if !is_cylinder {
                    bail!("the exact method applies to the cylinder only");
                }
                let harmonic::DomainKind::Cylinder { epsilon, .. } = domain.kind else {
                    unreachable!()
                };
                for &pole in &poles {
                    writeln!(
                        masses,
                        "{},exact,{},{},lower,{},0",
                        domain.id(),
                        pole.re,
                        pole.im,
                        harmonic::cylinder_lower_mass(epsilon, pole)
                    )?;
                    for &t in &hc.density_t {
                        let x = lower.point_at(t).re;
                        writeln!(
                            densities,
                            "{},exact,{},{},lower,{},{},{}",
                            domain.id(),
                            pole.re,
                            pole.im,
                            t,
                            x,
                            harmonic::cylinder_density(epsilon, pole, x)
                        )?;
                    }
                }
            }
            "grid" => {
                let ests = fd::measure_by_grid(&domain, &poles, hc.mesh)?;
                let op = fd::LaplaceOperator::new(&domain, hc.mesh)?;
                for (est, &pole) in ests.iter().zip(&poles) {
                    for (piece, m) in &est.masses {
                        writeln!(
                            masses,
                            "{},grid,{},{},{},{},{}",
                            domain.id(),
                            est.pole_re,
                            est.pole_im,
                            piece,
                            m,
                            est.error_of(*piece)
                        )?;
                    }
                    let samples: Vec<fd::BoundarySample> = hc
                        .density_t
                        .iter()
                        .map(|&t| fd::BoundarySample { piece: PieceId::Lower, t })
                        .collect();
                    let dens = fd::boundary_density_by_green(&op, pole, &samples)?;
                    for (&t, d) in hc.density_t.iter().zip(dens) {
                        writeln!(
                            densities,
                            "{},grid,{},{},lower,{},{},{}",
                            domain.id(),
                            pole.re,
                            pole.im,
                            t,
                            lower.point_at(t).re,
                            d
                        )?;
                    }
                }
            }
            "walk" => {
                for (i, &pole) in poles.iter().enumerate() {
                    let seed = config.master_seed.wrapping_add(i as u64);
                    let est = walk::measure_by_walk(&domain, pole, hc.walkers, seed)?;
                    for (piece, m) in &est.masses {
                        writeln!(
                            masses,
                            "{},walk,{},{},{},{},{}",
                            domain.id(),
                            est.pole_re,
                            est.pole_im,
                            piece,
                            m,
                            est.error_of(*piece)
                        )?;
                    }
                }
            }
            other => bail!("harmonic.methods: unknown method '{other}'"),
        }
    }
    let mut writer = RunWriter::new(out_dir)?;
    writer.write("masses.csv", masses.as_bytes())?;
    writer.write("densities.csv", densities.as_bytes())?;
    writer.finish("harmonic", config)?;
    Ok(true)
}
