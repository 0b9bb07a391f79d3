//! Scenario implementations behind the subcommands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;

use ensembleq::cavity::{
    cpf_gate_report, simulate_reflection, CavityParams, PulseProfile,
};
use ensembleq::faraday::{faraday_phases, phase_sweep_unwrapped, twice_reflection_cpf, ProbeParams};
use ensembleq::protocols::cluster::{
    build_cluster_chain_seeded, chain_stabilizer_expectations, cluster_chain_closed_form,
};
use ensembleq::protocols::scaling::{
    analytic_build_time, scaling_slope, simulate_build_time, ClusterSpec, TimeAccounting,
};
use ensembleq::protocols::{nonlocal_cnot, nonlocal_cnot_branches, repeater_snr};
use ensembleq::qsim::{Gate, StateVector};
use ensembleq::rydberg::{
    collective_rotation, critical_radius, excitation_error_fidelity, geometry_checks,
    BlockadeCurve, FoersterParams, DRIVE_PHASES_HADAMARD, DRIVE_PHASES_ROTATION,
};

use crate::config::{Resolver, SweepSpec, Unit, TWO_PI};
use crate::output::{fmt, CsvDoc};
use crate::{args, CliError};

/// Shared scenario context: parameter resolution, seed, and output path.
pub struct Ctx {
    pub resolver: Resolver,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Ctx {
    /// Resolve the output path, falling back to a scenario default.
    fn out_path(&mut self, default_name: &str) -> Result<PathBuf, CliError> {
        if let Some(p) = &self.out {
            let text = p.display().to_string();
            let _ = self.resolver.word("out", Some(text.clone()), None)?;
            return Ok(p.clone());
        }
        let word = self.resolver.word("out", None, Some(default_name))?;
        Ok(PathBuf::from(word))
    }

    fn finish(&mut self) -> Result<BTreeMap<String, String>, CliError> {
        let resolver = std::mem::replace(
            &mut self.resolver,
            Resolver::new(crate::config::Config::default()),
        );
        resolver.finish()
    }
}

fn mhz(omega: f64) -> f64 {
    omega / (TWO_PI * 1e6)
}

// ---------------------------------------------------------------------------

pub fn pulse_sim(a: &args::PulseSim, mut ctx: Ctx) -> Result<(), CliError> {
    let g = ctx.resolver.freq("g", a.g, Some(TWO_PI * 34e6))?;
    let kappa = ctx.resolver.freq("kappa", a.kappa, Some(TWO_PI * 4.1e6))?;
    let gamma_s = ctx.resolver.freq("gamma_s", a.gamma_s, Some(TWO_PI * 2.6e6))?;
    let duration = ctx.resolver.plain("duration", a.duration, Some(120.0))?;
    let samples = ctx.resolver.count("samples", a.samples, Some(4096))?;
    let out = ctx.out_path("pulse_sim.csv")?;

    let params = CavityParams::resonant(g, kappa, gamma_s)?;
    let pulse = PulseProfile::gaussian(duration / kappa, samples)?;
    let uncoupled = simulate_reflection(&params, &pulse, false)?;
    let coupled = simulate_reflection(&params, &pulse, true)?;

    let mut doc = CsvDoc::new("pulse-sim", ctx.finish()?, Some(ctx.seed));
    doc.header(&[
        "t_over_kappa",
        "f_in_abs",
        "f_out_uncoupled_abs",
        "f_out_coupled_abs",
    ]);
    let scale = (1.0 / kappa).sqrt(); // envelope unit: sqrt(kappa)
    for k in 0..pulse.len() {
        doc.row(vec![
            fmt(pulse.time(k) * kappa),
            fmt(pulse.samples()[k].norm() / scale),
            fmt(uncoupled.out_pulse.samples()[k].norm() / scale),
            fmt(coupled.out_pulse.samples()[k].norm() / scale),
        ]);
    }
    doc.write(&out)?;
    println!(
        "pulse-sim: wrote {} ({} rows); uncoupled projection {:.6}, coupled projection {:.6}, coupled loss {:.6}",
        out.display(),
        pulse.len(),
        uncoupled.projection.re,
        coupled.projection.re,
        coupled.loss
    );
    Ok(())
}

pub fn fidelity_sweep(a: &args::FidelitySweep, mut ctx: Ctx) -> Result<(), CliError> {
    let g = ctx.resolver.freq("g", a.g, Some(TWO_PI * 34e6))?;
    let kappa = ctx.resolver.freq("kappa", a.kappa, Some(TWO_PI * 4.1e6))?;
    let gamma_s = ctx.resolver.freq("gamma_s", a.gamma_s, Some(TWO_PI * 2.6e6))?;
    let samples = ctx.resolver.count("samples", a.samples, Some(4096))?;
    let sweep = ctx.resolver.sweep(
        "t",
        a.t_sweep.as_deref(),
        Some(SweepSpec {
            start: 10.0,
            stop: 120.0,
            count: 12,
            log: false,
            unit: Unit::None,
        }),
    )?;
    let out = ctx.out_path("fidelity_sweep.csv")?;

    let params = CavityParams::resonant(g, kappa, gamma_s)?;
    let points = sweep.points();
    let rows: Result<Vec<(f64, f64)>, ensembleq::Error> = points
        .par_iter()
        .map(|&t| {
            let pulse = PulseProfile::gaussian(t / kappa, samples)?;
            Ok((t, cpf_gate_report(&params, &pulse)?.fidelity))
        })
        .collect();
    let rows = rows?;

    let mut doc = CsvDoc::new("fidelity-sweep", ctx.finish()?, Some(ctx.seed));
    doc.header(&["T_over_kappa", "fidelity"]);
    for (t, f) in &rows {
        doc.row(vec![fmt(*t), fmt(*f)]);
    }
    doc.write(&out)?;
    let last = rows.last().expect("non-empty sweep");
    println!(
        "fidelity-sweep: wrote {} ({} points); F(T={}) = {:.6}",
        out.display(),
        rows.len(),
        last.0,
        last.1
    );
    Ok(())
}

pub fn loss_sweep(a: &args::LossSweep, mut ctx: Ctx) -> Result<(), CliError> {
    let kappa = ctx.resolver.freq("kappa", a.kappa, Some(TWO_PI * 4.1e6))?;
    let gamma_s = ctx.resolver.freq("gamma_s", a.gamma_s, Some(TWO_PI * 2.6e6))?;
    let samples = ctx.resolver.count("samples", a.samples, Some(4096))?;
    let sweep = ctx.resolver.sweep(
        "g",
        a.g_sweep.as_deref(),
        Some(SweepSpec {
            start: 1.0,
            stop: 12.0,
            count: 23,
            log: false,
            unit: Unit::None,
        }),
    )?;
    let out = ctx.out_path("loss_sweep.csv")?;

    let params = CavityParams::resonant(kappa, kappa, gamma_s)?;
    let pulse = PulseProfile::gaussian(120.0 / kappa, samples)?;
    let points = sweep.points();
    let rows: Result<Vec<(f64, f64)>, ensembleq::Error> = points
        .par_iter()
        .map(|&gk| {
            let p = CavityParams {
                g: gk * kappa,
                ..params
            };
            Ok((gk, simulate_reflection(&p, &pulse, true)?.loss))
        })
        .collect();
    let rows = rows?;

    let mut doc = CsvDoc::new("loss-sweep", ctx.finish()?, Some(ctx.seed));
    doc.header(&["g_over_kappa", "photon_loss"]);
    for (gk, loss) in &rows {
        doc.row(vec![fmt(*gk), fmt(*loss)]);
    }
    doc.write(&out)?;
    println!("loss-sweep: wrote {} ({} points)", out.display(), rows.len());
    Ok(())
}

pub fn faraday_phase(a: &args::FaradayPhase, mut ctx: Ctx) -> Result<(), CliError> {
    let g_over_kappa = ctx
        .resolver
        .plain("g_over_kappa", a.g_over_kappa, Some(0.5))?;
    let detuning = ctx.resolver.plain("detuning", a.detuning, Some(-0.5))?;
    let gamma_over_kappa = ctx
        .resolver
        .plain("gamma_over_kappa", a.gamma_over_kappa, Some(0.0))?;
    let sweep = match a.sweep.as_deref() {
        Some(text) => Some(ctx.resolver.sweep("sweep", Some(text), None)?),
        None => match ctx.resolver.sweep(
            "sweep",
            None,
            Some(SweepSpec {
                start: 0.0,
                stop: 0.0,
                count: 1,
                log: false,
                unit: Unit::None,
            }),
        )? {
            s if s.count == 1 && s.start == 0.0 && s.stop == 0.0 => None,
            s => Some(s),
        },
    };

    let probe = ProbeParams {
        omega_c: 0.0,
        omega_0: 0.0,
        omega_p: detuning,
        g: g_over_kappa,
        kappa: 1.0,
        gamma: gamma_over_kappa,
    };
    let phases = faraday_phases(&probe)?;
    let (gate, gate_fidelity) = twice_reflection_cpf(&probe)?;
    let ideal = gate.fidelity(&Gate::cpf_atom_photon())?;
    println!("phi={:.5} phi0={:.5}", phases.phi, phases.phi0);
    println!(
        "twice-reflection gate: probe fidelity {gate_fidelity:.6}, operator fidelity {ideal:.6}"
    );

    if let Some(sweep) = sweep {
        let out = ctx.out_path("faraday_phase.csv")?;
        let grid = sweep.points();
        let rows = phase_sweep_unwrapped(&probe, &grid)?;
        let mut doc = CsvDoc::new("faraday-phase", ctx.finish()?, Some(ctx.seed));
        doc.header(&["detuning_over_kappa", "phi", "phi0"]);
        for (wp, ph) in rows {
            doc.row(vec![fmt(wp), fmt(ph.phi), fmt(ph.phi0)]);
        }
        doc.write(&out)?;
        println!("faraday-phase: wrote {}", out.display());
    } else {
        ctx.finish()?;
    }
    Ok(())
}

pub fn blockade_curve(a: &args::BlockadeCurve, mut ctx: Ctx) -> Result<(), CliError> {
    let delta = ctx.resolver.freq("delta", a.delta, Some(TWO_PI * 555e6))?;
    let c3 = ctx.resolver.freq("c3", a.c3, Some(TWO_PI * 14_000e6))?;
    let d_phi = ctx.resolver.plain("d_phi", a.d_phi, Some(1.333))?;
    let level = ctx.resolver.word("level", a.level.clone(), Some("75s"))?;
    let sweep = ctx.resolver.sweep(
        "r",
        a.r_sweep.as_deref(),
        Some(SweepSpec {
            start: 1.0,
            stop: 10.0,
            count: 181,
            log: false,
            unit: Unit::Length,
        }),
    )?;
    let out = ctx.out_path("blockade_curve.csv")?;

    // radii in micrometers; c3 carries rad/s * um^3
    let to_um = |v: f64, unit: Unit| if unit == Unit::Length { v * 1e6 } else { v };
    let r_um: Vec<f64> = sweep
        .points()
        .into_iter()
        .map(|v| to_um(v, sweep.unit))
        .collect();
    let fp = FoersterParams::new(delta, c3, d_phi, &level)?;
    let curve = BlockadeCurve::generate(&fp, &r_um)?;
    let rc = critical_radius(&fp);

    let mut doc = CsvDoc::new("blockade-curve", ctx.finish()?, Some(ctx.seed));
    doc.header(&["r_um", "v_plus_mhz", "v_minus_mhz"]);
    for k in 0..curve.r.len() {
        doc.row(vec![
            fmt(curve.r[k]),
            fmt(mhz(curve.v_plus[k])),
            fmt(mhz(curve.v_minus[k])),
        ]);
    }
    doc.write(&out)?;
    println!(
        "blockade-curve[{level}]: wrote {} ({} radii); Rc = {:.4} um",
        out.display(),
        curve.r.len(),
        rc
    );
    Ok(())
}

pub fn rotation_check(a: &args::RotationCheck, mut ctx: Ctx) -> Result<(), CliError> {
    let phi_word = ctx.resolver.word("phi", a.phi.clone(), Some("pi"))?;
    let phi = match phi_word.as_str() {
        "pi" => std::f64::consts::PI,
        "pi/2" => std::f64::consts::FRAC_PI_2,
        "pi/4" => std::f64::consts::FRAC_PI_4,
        other => other
            .parse()
            .map_err(|_| CliError::config(format!("bad phi `{other}`")))?,
    };
    let phases_word = ctx
        .resolver
        .word("phases", a.phases.clone(), Some("rotation"))?;
    let drive = match phases_word.as_str() {
        "rotation" => DRIVE_PHASES_ROTATION,
        "hadamard" => DRIVE_PHASES_HADAMARD,
        other => {
            return Err(CliError::config(format!(
                "phases must be `rotation` or `hadamard`, got `{other}`"
            )))
        }
    };
    let compare_word = ctx.resolver.word("compare", a.compare.clone(), Some("auto"))?;

    let rot = collective_rotation(phi, drive);
    let gate = rot.qubit_gate()?;
    let target = match compare_word.as_str() {
        "x" => Some(("x", Gate::x())),
        "hadamard" => Some(("hadamard", Gate::hadamard())),
        "identity" => Some(("identity", Gate::identity(&[2]))),
        "none" => None,
        "auto" => {
            if (phi - std::f64::consts::PI).abs() < 1e-12 && phases_word == "rotation" {
                Some(("x", Gate::x()))
            } else if (phi - std::f64::consts::FRAC_PI_2).abs() < 1e-12
                && phases_word == "hadamard"
            {
                Some(("hadamard", Gate::hadamard()))
            } else {
                None
            }
        }
        other => {
            return Err(CliError::config(format!(
                "compare must be x|hadamard|identity|none|auto, got `{other}`"
            )))
        }
    };

    println!("rotation-check: phi = {phi:.6}, phases = {phases_word}");
    for (r, row) in rot.unitary.iter().enumerate() {
        println!(
            "  U[{r}] = [{:+.6}{:+.6}i, {:+.6}{:+.6}i]",
            row[0].re, row[0].im, row[1].re, row[1].im
        );
    }
    println!(
        "  leakage = {:.3e}, unitarity defect = {:.3e}",
        rot.leakage,
        rot.unitarity_defect()
    );
    let mut fidelity_line = String::new();
    if let Some((name, t)) = target {
        let f = gate.fidelity(&t)?;
        fidelity_line = format!("fidelity vs {name} = {f:.12}");
        println!("  {fidelity_line}");
    }

    let p2 = a.p2.map(Ok).unwrap_or_else(|| {
        ctx.resolver
            .plain("p2", None, Some(-1.0))
            .map(|v| if v < 0.0 { f64::NAN } else { v })
    })?;
    if !p2.is_nan() {
        let baseline = ctx.resolver.plain("baseline", a.baseline, Some(0.997))?;
        let f = excitation_error_fidelity(p2, baseline)?;
        println!("  double-excitation model: F(P2={p2}) = {f:.6} (baseline {baseline})");
    }

    if ctx.out.is_some() {
        let out = ctx.out_path("rotation_check.csv")?;
        let mut doc = CsvDoc::new("rotation-check", ctx.finish()?, Some(ctx.seed));
        doc.header(&["quantity", "value"]);
        doc.row(vec!["phi".into(), fmt(phi)]);
        doc.row(vec!["leakage".into(), fmt(rot.leakage)]);
        if !fidelity_line.is_empty() {
            let (name, value) = fidelity_line.split_once(" = ").expect("formatted above");
            doc.row(vec![name.into(), value.into()]);
        }
        doc.write(&out)?;
        println!("rotation-check: wrote {}", out.display());
    } else {
        ctx.finish()?;
    }
    Ok(())
}

pub fn cluster_build(a: &args::ClusterBuild, mut ctx: Ctx) -> Result<(), CliError> {
    let n = ctx.resolver.count("n", a.n, Some(4))?;
    let out = ctx.out_path("cluster_build.csv")?;

    let state = build_cluster_chain_seeded(n, ctx.seed)?;
    let closed = cluster_chain_closed_form(n)?;
    let fidelity = state.fidelity(&closed)?;
    let stabilizers = chain_stabilizer_expectations(&state)?;

    let mut doc = CsvDoc::new("cluster-build", ctx.finish()?, Some(ctx.seed));
    doc.header(&["qubit", "stabilizer_expectation"]);
    for (k, v) in stabilizers.iter().enumerate() {
        doc.row(vec![k.to_string(), fmt(*v)]);
    }
    doc.write(&out)?;
    let worst = stabilizers
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    println!(
        "cluster-build: n = {n}, fidelity vs closed form = {fidelity:.12}, worst stabilizer deviation = {worst:.3e}; wrote {}",
        out.display()
    );
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::config(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

pub fn cluster_scaling(a: &args::ClusterScaling, mut ctx: Ctx) -> Result<(), CliError> {
    let p_word = ctx
        .resolver
        .word("p", a.p_values.clone(), Some("0.3,0.5,0.9"))?;
    let n_word = ctx
        .resolver
        .word("n", a.n_values.clone(), Some("4,8,16"))?;
    let trials = ctx.resolver.count("trials", a.trials, Some(100_000))?;
    let t0 = ctx.resolver.plain("t0", a.t0, Some(1.0))?;
    let mode_word = ctx.resolver.word("mode", a.mode.clone(), Some("lockstep"))?;
    let mode = match mode_word.as_str() {
        "lockstep" => TimeAccounting::LockstepParallel,
        "serial" => TimeAccounting::SerialAttempts,
        other => {
            return Err(CliError::config(format!(
                "mode must be `lockstep` or `serial`, got `{other}`"
            )))
        }
    };
    let out = ctx.out_path("cluster_scaling.csv")?;

    let p_values: Vec<f64> = parse_list(&p_word, "p")?;
    let n_values: Vec<usize> = parse_list(&n_word, "n")?;
    let mut jobs = Vec::new();
    for &p in &p_values {
        for &n in &n_values {
            jobs.push((p, n));
        }
    }
    let seed = ctx.seed;
    let results: Result<Vec<(f64, usize, f64, f64)>, CliError> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(p, n))| {
            let spec = ClusterSpec::new(n, p, t0)?;
            let point_seed = seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let stats = simulate_build_time(&spec, trials, point_seed, mode)?;
            Ok((p, n, stats.mean, analytic_build_time(&spec)))
        })
        .collect();
    let results = results?;

    let mut doc = CsvDoc::new("cluster-scaling", ctx.finish()?, Some(seed));
    doc.header(&["p", "n", "mean_time", "analytic_time"]);
    for (p, n, mean, analytic) in &results {
        doc.row(vec![fmt(*p), n.to_string(), fmt(*mean), fmt(*analytic)]);
    }
    doc.write(&out)?;

    for &p in &p_values {
        let points: Vec<(f64, f64)> = results
            .iter()
            .filter(|(rp, ..)| rp == &p)
            .map(|(_, n, mean, _)| (*n as f64, *mean))
            .collect();
        if points.len() >= 2 {
            let slope = scaling_slope(&points);
            let expected = (1.0 / p).log2();
            println!(
                "cluster-scaling[{mode_word}]: p = {p}, slope = {slope:.4}, log2(1/p) = {expected:.4}"
            );
        }
    }
    println!("cluster-scaling: wrote {}", out.display());
    Ok(())
}

pub fn nonlocal_cnot_cmd(a: &args::NonlocalCnot, mut ctx: Ctx) -> Result<(), CliError> {
    let input_word = ctx.resolver.word("input", a.input.clone(), Some("random"))?;
    let exhaustive = a.exhaustive;

    let make_input = |word: &str, rng: &mut rand_chacha::ChaCha8Rng| -> Result<StateVector, CliError> {
        use rand::Rng;
        Ok(match word {
            "00" | "01" | "10" | "11" => {
                let bits: Vec<usize> = word
                    .chars()
                    .map(|c| c.to_digit(10).unwrap() as usize)
                    .collect();
                StateVector::computational(&[2, 2], &bits)?
            }
            "plus" => StateVector::plus_qubits(2)?,
            "bell" => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                StateVector::from_amplitudes(
                    &[2, 2],
                    vec![
                        Complex64::new(s, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(s, 0.0),
                    ],
                )?
            }
            "random" => {
                let mut amps: Vec<Complex64> = (0..4)
                    .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                let norm = amps.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                for x in &mut amps {
                    *x /= norm;
                }
                StateVector::from_amplitudes(&[2, 2], amps)?
            }
            other => {
                return Err(CliError::config(format!(
                    "input must be 00|01|10|11|plus|bell|random, got `{other}`"
                )))
            }
        })
    };

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);

    if exhaustive {
        let mut exact = 0;
        let mut total = 0;
        let mut rows = Vec::new();
        for word in ["00", "01", "10", "11"] {
            let psi = make_input(word, &mut rng)?;
            let want = psi.apply(&Gate::cnot(), &[0, 1])?;
            for b in nonlocal_cnot_branches(&psi)? {
                total += 1;
                let dev = b
                    .state
                    .amps()
                    .iter()
                    .zip(want.amps())
                    .map(|(x, w)| (x - w).norm())
                    .fold(0.0, f64::max);
                if dev < 1e-12 {
                    exact += 1;
                }
                let corr: Vec<String> = b
                    .corrections
                    .iter()
                    .map(|c| format!("{}{}", c.pauli, c.site))
                    .collect();
                rows.push(vec![
                    word.to_string(),
                    b.detections[0].label.clone(),
                    b.detections[1].label.clone(),
                    corr.join(" "),
                    fmt(dev),
                ]);
            }
        }
        println!("nonlocal-cnot: {exact}/{total} branches exact");
        if ctx.out.is_some() {
            let out = ctx.out_path("nonlocal_cnot.csv")?;
            let mut doc = CsvDoc::new("nonlocal-cnot", ctx.finish()?, Some(ctx.seed));
            doc.header(&["input", "e1", "e2", "corrections", "max_amplitude_deviation"]);
            for r in rows {
                doc.row(r);
            }
            doc.write(&out)?;
            println!("nonlocal-cnot: wrote {}", out.display());
        } else {
            ctx.finish()?;
        }
        if exact != total {
            return Err(CliError::numerical(format!(
                "{} of {} branches deviated from the target gate",
                total - exact,
                total
            )));
        }
        return Ok(());
    }

    let psi = make_input(&input_word, &mut rng)?;
    let want = psi.apply(&Gate::cnot(), &[0, 1])?;
    let outcome = nonlocal_cnot(&psi, &mut rng)?;
    let fid = outcome.state.fidelity(&want)?;
    let corr: Vec<String> = outcome
        .corrections
        .iter()
        .map(|c| format!("{}{}", c.pauli, c.site))
        .collect();
    println!(
        "nonlocal-cnot: input {input_word}, outcomes E1={} E2={}, corrections [{}], fidelity {fid:.12}",
        outcome.detections[0].label,
        outcome.detections[1].label,
        corr.join(" ")
    );
    ctx.finish()?;
    Ok(())
}

pub fn repeater_snr_cmd(a: &args::RepeaterSnr, mut ctx: Ctx) -> Result<(), CliError> {
    let n_atoms = ctx.resolver.plain("n_atoms", a.n_atoms, Some(1000.0))?;
    let g = ctx.resolver.freq("g", a.g, Some(TWO_PI * 34e6))?;
    let kappa = ctx.resolver.freq("kappa", a.kappa, Some(TWO_PI * 4.1e6))?;
    let gamma_s = ctx.resolver.freq("gamma_s", a.gamma_s, Some(TWO_PI * 2.6e6))?;
    let snr = repeater_snr(n_atoms, g, kappa, gamma_s)?;
    println!("repeater-snr: N = {n_atoms}, R = {snr:.4e}");
    if ctx.out.is_some() {
        let out = ctx.out_path("repeater_snr.csv")?;
        let mut doc = CsvDoc::new("repeater-snr", ctx.finish()?, Some(ctx.seed));
        doc.header(&["n_atoms", "snr"]);
        doc.row(vec![fmt(n_atoms), fmt(snr)]);
        doc.write(&out)?;
        println!("repeater-snr: wrote {}", out.display());
    } else {
        ctx.finish()?;
    }
    Ok(())
}

pub fn geometry_check(a: &args::GeometryCheck, mut ctx: Ctx) -> Result<(), CliError> {
    let n_atoms = ctx.resolver.plain("n_atoms", a.n_atoms, Some(1000.0))?;
    let delta_r_perp = ctx
        .resolver
        .length_um("delta_r_perp", a.delta_r_perp, Some(5e-6))?;
    let lambda = ctx
        .resolver
        .length_um("lambda", a.lambda_nm.map(|v| v * 1e-3), Some(780e-9))?;
    let n_g = ctx.resolver.plain("n_g", a.n_g, Some(5.0))?;
    let delta_n = match a.delta_n {
        Some(v) => Some(v),
        None => {
            let v = ctx.resolver.plain("delta_n", None, Some(-1.0))?;
            if v < 0.0 {
                None
            } else {
                Some(v)
            }
        }
    };

    let rep = geometry_checks(n_atoms, delta_r_perp, lambda, n_g, delta_n)?;
    println!(
        "geometry-check: d = {:.4e} m, lambda/2pi = {:.4e} m, r_g = {:.4e} m",
        rep.spacing, rep.reduced_wavelength, rep.ground_state_radius
    );
    println!(
        "  d / (lambda/2pi) = {:.4} -> single-particle dephasing regime: {}",
        rep.spacing_over_reduced_wavelength,
        if rep.dephasing_single_particle { "yes" } else { "no" }
    );
    println!(
        "  d / r_g = {:.4} -> ground-state interactions negligible: {}",
        rep.spacing_over_ground_radius,
        if rep.ground_interaction_negligible { "yes" } else { "no" }
    );
    if let Some(fl) = rep.number_fluctuation {
        println!(
            "  atom-number fluctuation dN/N = {:.4e} -> {}",
            fl.ratio,
            if fl.negligible { "negligible" } else { "significant" }
        );
    }
    if ctx.out.is_some() {
        let out = ctx.out_path("geometry_check.csv")?;
        let mut doc = CsvDoc::new("geometry-check", ctx.finish()?, Some(ctx.seed));
        doc.header(&["quantity", "value"]);
        doc.row(vec!["spacing_m".into(), fmt(rep.spacing)]);
        doc.row(vec![
            "reduced_wavelength_m".into(),
            fmt(rep.reduced_wavelength),
        ]);
        doc.row(vec![
            "ground_state_radius_m".into(),
            fmt(rep.ground_state_radius),
        ]);
        doc.row(vec![
            "spacing_over_reduced_wavelength".into(),
            fmt(rep.spacing_over_reduced_wavelength),
        ]);
        doc.row(vec![
            "spacing_over_ground_radius".into(),
            fmt(rep.spacing_over_ground_radius),
        ]);
        doc.write(&out)?;
        println!("geometry-check: wrote {}", out.display());
    } else {
        ctx.finish()?;
    }
    Ok(())
}

