//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timeless_core::clock::{make_cyclic_clock, make_two_level_clock, ClockModel};
use timeless_core::interactions::{self, build_interaction, kraus_evolution, validate_interaction, InteractionSpec};
use timeless_core::linalg::{self, basis, c, identity, max_norm, pauli_x, pauli_z, tensor, CMat, CVec};
use timeless_core::models::{self, TwoLevelParams, CODATA_2018};
use timeless_core::pictures::{self, Difference, HeisenbergState};
use timeless_core::universe::{self, history_state_mixed, history_state_pure, UniverseSpec};
use timeless_core::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn h_qubit() -> CMat {
    pauli_x().scale(0.5)
}

/// Free qubit clock whose period `4π` makes `σx/2` evolution periodic.
fn free_spec(d: usize) -> UniverseSpec {
    let clock = make_cyclic_clock(d, 0.0, 4.0 * PI / d as f64).unwrap();
    UniverseSpec::free(h_qubit(), clock, 0.0).unwrap()
}

/// Gravitational coupling with `Λ = 1`, `ℰ = 0`: `g(±½) ∈ {−1/3, 1}`, period `6π`.
fn interacting_spec(d: usize) -> UniverseSpec {
    let clock = make_cyclic_clock(d, 0.0, 6.0 * PI / d as f64).unwrap();
    let grav = InteractionSpec::gravitational(1.0).unwrap();
    UniverseSpec::new(h_qubit(), clock, Some(grav), 0.0).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    let v = CVec::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = v.norm();
    v / c(norm, 0.0)
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    linalg::hermitian_part(&a)
}

/// Random qubit state whose populations in the `σx` eigenbasis are both ≥ 5%.
fn non_eigen_qubit(rng: &mut ChaCha8Rng) -> CVec {
    let plus = CVec::from_vec(vec![c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
    loop {
        let v = random_state(rng, 2);
        let p = plus.dotc(&v).norm_sqr();
        if (0.05..=0.95).contains(&p) {
            return v;
        }
    }
}

fn free_round_trip() -> Outcome {
    let spec = free_spec(64);
    let psi0 = basis(2, 0);
    let hist = history_state_pure(&spec, &psi0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 1.0;
    for (k, &t) in spec.clock().grid().iter().enumerate() {
        let oracle = linalg::expm_hermitian(&h_qubit(), t).unwrap() * &psi0;
        worst = worst.min(linalg::pure_fidelity(&hist.condition(k).unwrap(), &oracle));
    }
    ensure(worst >= 1.0 - 1e-12, || format!("worst fidelity {worst:.15}"))?;
    Ok(format!("d=64, worst fidelity 1 - {:.1e}", 1.0 - worst))
}

fn hp_equivalence() -> Outcome {
    let spec = free_spec(32);
    let psi0 = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let hist = history_state_pure(&spec, &psi0).unwrap();
    let map = pictures::sp_hp_map(&spec).unwrap();
    let hstate = pictures::heisenberg_state(&hist, &map).map_err(|e| e.to_string())?;
    let (mut op_err, mut exp_err) = (0.0f64, 0.0f64);
    for o in linalg::paulis().iter() {
        let o_hp = pictures::to_hp_observable(o, &map).unwrap();
        for (k, &t) in spec.clock().grid().iter().enumerate() {
            let u = linalg::expm_hermitian(&h_qubit(), t).unwrap();
            let want = u.adjoint() * o * &u;
            let got = pictures::reduced_relative_observable(&o_hp, &map, k, &hstate).unwrap();
            op_err = op_err.max(max_norm(&(got - want)));
            let sp = linalg::vec_expectation(o, &hist.condition(k).unwrap());
            let hp = pictures::relative_expectation(&o_hp, &map, k, &hstate).unwrap();
            exp_err = exp_err.max((sp - hp).abs());
        }
    }
    ensure(op_err <= 1e-12 && exp_err <= 1e-12, || format!("observable {op_err:.2e}, expectation {exp_err:.2e}"))?;
    Ok(format!("observables {op_err:.1e}, expectations {exp_err:.1e}"))
}

fn qubit_clock() -> Outcome {
    let mut worst = 0.0f64;
    for dt in [PI / 4.0, PI / 2.0, PI] {
        let spec = UniverseSpec::free(h_qubit(), make_two_level_clock(0.0, dt).unwrap(), 0.0).unwrap();
        let hist = history_state_pure(&spec, &basis(2, 0)).unwrap();
        let rho = linalg::projector(&hist.condition(1).unwrap());
        worst = worst.max(max_norm(&(rho - models::qubit_clock_reference(dt))));
    }
    ensure(worst <= 1e-12, || format!("entrywise {worst:.2e}"))?;
    Ok(format!("entrywise {worst:.1e}"))
}

fn omega_sweep() -> Outcome {
    let lambdas: Vec<f64> =
        (0..=6000).map(|i| (i as f64 - 3000.0) / 1000.0).filter(|&l| l != 0.0 && l.abs() != 0.5).collect();
    let template = TwoLevelParams::qubit(1.0, 0.0);
    let oracle = models::sweep(&template, &lambdas, models::SweepBackend::Oracle);
    let pipeline = models::sweep(&template, &lambdas, models::SweepBackend::Pipeline);

    let (_, w1) = models::phi_omega(1.0, 0.0).unwrap();
    ensure((w1 - 4.0 / 3.0).abs() <= 1e-12, || format!("ω(1,0) = {w1}"))?;
    for r in &oracle {
        let w = r.omega.ok_or_else(|| format!("unexpected singular point at Λ = {}", r.lambda))?;
        let inside = r.lambda.abs() < 0.5;
        ensure((w < 0.0) == inside, || format!("sign of ω wrong at Λ = {}", r.lambda))?;
    }
    for edge in [-0.5, 0.5] {
        for side in [-1e-4, 1e-4] {
            let (_, w) = models::phi_omega(edge + side, 0.0).unwrap();
            ensure(w.abs() > 1e3, || format!("|ω| = {} at Λ = {}", w.abs(), edge + side))?;
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in oracle.iter().zip(&pipeline) {
        let (wa, wb) = (a.omega.unwrap(), b.omega.ok_or("pipeline singular")?);
        worst = worst.max((wa - wb).abs() / wa.abs().max(1.0));
    }
    ensure(worst <= 1e-9, || format!("pipeline vs oracle {worst:.2e}"))?;
    Ok(format!("{} points, ω(1,0) = 4/3, pipeline vs oracle {worst:.1e}", lambdas.len()))
}

fn massive_model() -> Outcome {
    let p = TwoLevelParams::massive(1.0, 0.0, 2.0, 1.0);
    let (_, w) = models::phi_omega_massive(&p).unwrap();
    // Independent oracle: eigenvalues E/(1 + E/Λ) of H_eff at E = mc² ± E_I/2.
    let heff = |e: f64| e / (1.0 + e);
    let oracle = heff(2.5) - heff(1.5);
    ensure((w - oracle).abs() <= 1e-9, || format!("ω_m = {w}, oracle {oracle}"))?;
    ensure((w - 0.1142857).abs() <= 5e-8, || format!("ω_m = {w}"))?;

    let step = 1e-3;
    let roots = models::locate_singularities(&p, -3.0, 3.0, 6001).unwrap();
    ensure(roots.len() == 2, || format!("roots {roots:?}"))?;
    ensure((roots[0] + 2.5).abs() <= step && (roots[1] + 1.5).abs() <= step, || format!("roots {roots:?}"))?;

    let k = CODATA_2018;
    let (mc2, ei) = (2.0, 1.0);
    let d = models::critical_distances(mc2, ei, &k).unwrap();
    let mut worst = 0.0f64;
    for (dist, want) in [(d.d_minus, -1.5), (d.d_plus, -2.5)] {
        let lambda = -models::gravitational_lambda(dist, &k);
        worst = worst.max((lambda / want - 1.0).abs());
    }
    ensure(worst <= 1e-9, || format!("back-substitution {worst:.2e}"))?;
    Ok(format!("ω_m(1,0) = {w:.9}, singular Λ = {:.6}, {:.6}, back-substitution {worst:.1e}", roots[0], roots[1]))
}

fn decoherence() -> Outcome {
    let grav = InteractionSpec::gravitational(1.0).unwrap();
    let sector = |e: f64| (0.5, interactions::effective_hamiltonian(&h_qubit(), Some(&grav), e).unwrap().op);
    let two = [sector(0.0), sector(0.5)];
    let rho0 = linalg::projector(&basis(2, 0));
    let tau_d = 1.5 * PI;
    let rho = kraus_evolution(&rho0, &two, tau_d).unwrap();
    let purity = linalg::purity(&rho);
    let dist = linalg::state_distance(&rho, &identity(2).scale(0.5)).unwrap().trace_distance;
    ensure((purity - 0.5).abs() <= 1e-9 && dist <= 1e-9, || format!("purity {purity}, distance {dist:.2e}"))?;

    let single = [(1.0, two[0].1.clone())];
    let mut worst = 0.0f64;
    for i in 0..=60 {
        let t = tau_d * i as f64 / 60.0;
        let r = kraus_evolution(&rho0, &single, t).unwrap();
        worst = worst.max((linalg::purity(&r) - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("single-sector purity drift {worst:.2e}"))?;
    Ok(format!("purity {purity:.12} at 1.5π, distance to I/2 {dist:.1e}, control drift {worst:.1e}"))
}

fn ratios() -> Outcome {
    let p = TwoLevelParams::qubit(1.0, 0.5);
    let ct = models::coherence_time(&p).unwrap();
    let exact = p.lambda / (2.0 * p.energy);
    ensure(ct.ratio == exact, || format!("ratio {} vs Λ/(2ℰ) = {exact}", ct.ratio))?;
    ensure((ct.tau_d / ct.tau - exact).abs() <= 1e-15 * exact, || "τ_D/τ differs from Λ/(2ℰ)".into())?;
    let searched = models::decoherence_time_search(&p, 10.0, 400).unwrap();
    let rel = (searched / ct.tau_d - 1.0).abs();
    ensure(rel <= 1e-6, || format!("searched τ_D = {searched}, closed form {}", ct.tau_d))?;

    let k = CODATA_2018;
    let r10 = models::gravitational_ratio(1e-10, 10.0 * k.electron_volt, &k).unwrap();
    ensure((r10 / 3.8e51 - 1.0).abs() <= 0.01, || format!("ratio at 10 eV = {r10:.3e}"))?;
    let rp = models::gravitational_ratio(1e-10, k.proton_mass * k.c * k.c, &k).unwrap();
    ensure((rp / 4.0e43 - 1.0).abs() <= 0.01, || format!("ratio at proton rest energy = {rp:.3e}"))?;
    println!("INFO  proton rest energy at 1e-10 m gives {rp:.3e}; the published estimate of 1e41 is two orders lower");
    Ok(format!("τ_D/τ = {exact}, search {rel:.1e} rel, 10 eV: {r10:.3e}, m_p c²: {rp:.3e}"))
}

fn group_average() -> Outcome {
    let d = 16;
    let spec = free_spec(d);
    let map = pictures::sp_hp_map(&spec).unwrap();
    let hc = tensor(&identity(2), spec.clock().h_op());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let o = random_hermitian(&mut rng, 2);
        let o_hp = pictures::to_hp_observable(&o, &map).unwrap();
        let avg = pictures::group_average(&o_hp, 2, spec.clock()).unwrap();
        worst = worst.max(max_norm(&linalg::commutator(&avg, &hc)));
    }
    ensure(worst <= 1e-12, || format!("commutator {worst:.2e}"))?;
    Ok(format!("10 observables at d=16, worst commutator {worst:.1e}"))
}

struct DiffResiduals {
    state: f64,
    observable: f64,
    heisenberg_state: f64,
}

fn differential_residuals(d: usize) -> DiffResiduals {
    let spec = free_spec(d);
    let clock = spec.clock();
    let hist = history_state_pure(&spec, &non_eigen_start()).unwrap();
    let h_univ = tensor(&h_qubit(), &identity(d));
    let lhs = pictures::time_op_derivative_state(hist.vec(), 2, clock).unwrap();
    let state = (lhs + (&h_univ * hist.vec()) * linalg::I).norm();

    let map = pictures::sp_hp_map(&spec).unwrap();
    let oz = pictures::to_hp_observable(&pauli_z(), &map).unwrap();
    let lhs = pictures::time_op_derivative_op(&oz, clock, Difference::Symmetric).unwrap();
    let observable = max_norm(&(lhs - linalg::commutator(&h_univ, &oz) * linalg::I));

    let r = pictures::heisenberg_state(&hist, &map).unwrap().density();
    let heisenberg_state = max_norm(&pictures::time_op_derivative_op(&r, clock, Difference::Symmetric).unwrap());
    DiffResiduals { state, observable, heisenberg_state }
}

fn non_eigen_start() -> CVec {
    CVec::from_vec(vec![c(0.8, 0.0), c(0.36, 0.48)])
}

fn differential() -> Outcome {
    let coarse = differential_residuals(32);
    let fine = differential_residuals(64);
    let r_state = coarse.state / fine.state;
    let r_obs = coarse.observable / fine.observable;
    ensure((3.5..=4.5).contains(&r_state), || format!("state residual ratio {r_state:.3}"))?;
    ensure((3.5..=4.5).contains(&r_obs), || format!("observable residual ratio {r_obs:.3}"))?;
    let frozen = coarse.heisenberg_state.max(fine.heisenberg_state);
    ensure(frozen <= 1e-10, || format!("Heisenberg state derivative {frozen:.2e}"))?;
    Ok(format!("state ratio {r_state:.3}, observable ratio {r_obs:.3}, dR/dt̂ {frozen:.1e}"))
}

fn conditioned_spread(r: &CMat, d: usize) -> f64 {
    let first = universe::condition_density(r, 2, d, 0).unwrap();
    (1..d)
        .map(|k| {
            let rho = universe::condition_density(r, 2, d, k).unwrap();
            linalg::state_distance(&rho, &first).unwrap().trace_distance
        })
        .fold(0.0, f64::max)
}

fn separability() -> Outcome {
    let d = 8;
    let spec = free_spec(d);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..50 {
        let h = HeisenbergState::product(&random_state(&mut rng, 2), spec.clock());
        let HeisenbergState::Pure(v) = &h else { unreachable!() };
        let ok = h.no_evolution(2, d).unwrap().passed && linalg::schmidt_rank(v, 2, d, 1e-10).unwrap() == 1;
        ensure(ok, || format!("product state {i} rejected"))?;
    }
    let mut weakest = f64::INFINITY;
    for i in 0..50 {
        let hist = history_state_pure(&spec, &non_eigen_qubit(&mut rng)).unwrap();
        let report = pictures::no_evolution_pure(hist.vec(), 2, d).unwrap();
        ensure(!report.passed, || format!("history state {i} passed the no-evolution check"))?;
        weakest = weakest.min(report.worst_deviation);
    }

    let rho0 = linalg::projector(&non_eigen_start());
    let separable = universe::separable_history(&spec, &rho0).unwrap();
    let hist = history_state_pure(&spec, &non_eigen_start()).unwrap();
    let decohered = universe::dephase_clock(&hist.density(), 2, d).unwrap();
    let mut notes = Vec::new();
    for (name, r) in [("separable", &separable), ("decohered", &decohered)] {
        let residual = universe::translation_residual(r, &spec).unwrap();
        ensure(residual <= 1e-10, || format!("{name}: translation residual {residual:.2e}"))?;
        let spread = conditioned_spread(r, d);
        ensure(spread >= 0.01, || format!("{name}: conditioned states do not evolve"))?;
        let commutator = universe::stationarity_residual_mixed(r, &spec).unwrap();
        notes.push(format!("{name} {residual:.1e} (generator commutator {commutator:.1e})"));
    }
    Ok(format!(
        "50/50 products pass, 50/50 histories fail (min deviation {weakest:.2}), clock-step residuals: {}",
        notes.join(", ")
    ))
}

fn constraint_gate() -> Outcome {
    let clock: ClockModel = make_cyclic_clock(16, 0.0, PI / 4.0).unwrap();
    let h = h_qubit();
    let faults = [
        ("σz⊗ĥ", tensor(&pauli_z(), clock.h_op())),
        ("Ĥ⊗t̂", tensor(&h, clock.t_op())),
        ("Ĥ⊗ĥ²", tensor(&h, &(clock.h_op() * clock.h_op()))),
    ];
    for (name, v) in &faults {
        let report = validate_interaction(v, &h, &clock).unwrap();
        ensure(!report.passed(), || format!("{name} accepted"))?;
    }
    let grav = InteractionSpec::gravitational(1.0).unwrap();
    let vg = build_interaction(&grav, &h, &clock).unwrap();
    ensure(validate_interaction(&vg, &h, &clock).unwrap().passed(), || "gravitational coupling rejected".into())?;

    let base = interacting_spec(8);
    let sectors = [(0.5, 0.0, linalg::projector(&basis(2, 0))), (0.5, 0.5, linalg::projector(&basis(2, 1)))];
    let mixed = history_state_mixed(&base, &sectors).unwrap();
    match pictures::sp_hp_map_mixed(&mixed) {
        Err(Error::NoPictureMap(msg)) => {
            Ok(format!("3 faults rejected, gravitational coupling accepted, unequal sectors: {msg}"))
        }
        other => Err(format!("unequal sectors gave {:?}", other.map(|m| m.kind()))),
    }
}

fn entanglement_necessity() -> Outcome {
    let d = 16;
    let spec = interacting_spec(d);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut smallest = f64::INFINITY;
    let mut tested = 0;
    for _ in 0..50 {
        let hist = history_state_pure(&spec, &non_eigen_qubit(&mut rng)).unwrap();
        if conditioned_spread(&hist.density(), d) < 0.01 {
            continue;
        }
        tested += 1;
        let s = linalg::schmidt_coefficients(hist.vec(), 2, d).unwrap();
        ensure(s[1] > 1e-3, || format!("second Schmidt coefficient {:.2e}", s[1]))?;
        smallest = smallest.min(s[1]);
    }
    ensure(tested > 0, || "no non-stationary history state sampled".into())?;

    let free = free_spec(d);
    let rho0 = linalg::projector(&non_eigen_start());
    let residual = universe::translation_residual(&universe::separable_history(&free, &rho0).unwrap(), &free).unwrap();
    ensure(residual <= 1e-10, || format!("free separable construction residual {residual:.2e}"))?;
    let coupled = universe::translation_residual(&universe::separable_history(&spec, &rho0).unwrap(), &spec).unwrap();
    Ok(format!(
        "{tested} interacting histories, min second Schmidt coefficient {smallest:.3}; free separable residual {residual:.1e}, coupled separable residual {coupled:.2}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("free-qubit round trip", free_round_trip),
        ("Heisenberg-picture equivalence", hp_equivalence),
        ("qubit clock", qubit_clock),
        ("ω(Λ) sweep", omega_sweep),
        ("massive two-level model", massive_model),
        ("two-sector decoherence", decoherence),
        ("coherence-time ratios", ratios),
        ("group average", group_average),
        ("differential formulation", differential),
        ("separability and no evolution", separability),
        ("interaction constraint gate", constraint_gate),
        ("entanglement under interaction", entanglement_necessity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
