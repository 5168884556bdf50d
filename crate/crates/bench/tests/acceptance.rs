//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the benchmarks execute once, in
//! order, and the last criterion can collect the gaps of every barrier run.

use std::process::ExitCode;
use std::time::Instant;

use contact_bench::metrics::{max_relative_difference, profile_oscillation, separation_angle, strictly_decreasing};
use contact_bench::run::{run, RunOutcome};
use contact_bench::studies::{dhat_study, kappa_study, mesh_study};
use contact_bench::{Method, ProblemConfig, ProblemId};
use embedded_contact::assembly::{BoundaryConditions, Integration, Material, Materials, Model, ModelSetup};
use embedded_contact::contact::{
    barrier_energy, contact_pressure, friction_smoothing, g_function, minimize_g, normal_stiffness, parameterize,
    pressure_shape, update_traction, BarrierParams, ContactLaw, INITIAL_GAP_RATIO,
};
use embedded_contact::mesh::{Boundary, InterfaceGeometry, Mesh};
use embedded_contact::solver::{linear_ramp, run_load_steps, NewtonOptions};
use embedded_contact::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Smallest barrier gap of a converged run, with its label.
#[derive(Default)]
struct GapLedger {
    entries: Vec<(String, f64)>,
}

impl GapLedger {
    fn add(&mut self, label: &str, out: &RunOutcome) {
        if out.problem.config.method != Method::Barrier {
            return;
        }
        for (k, p) in out.profiles.iter().enumerate() {
            self.entries.push((format!("{label} step {}", k + 1), p.min_gap()));
        }
    }
}

fn check(cond: bool, what: String, failures: &mut Vec<String>) {
    if !cond {
        failures.push(what);
    }
}

fn verdict(details: String, failures: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Ok(details)
    } else {
        Err(format!("{}; {details}", failures.join("; ")))
    }
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn criterion_1() -> Outcome {
    let mut fails = Vec::new();
    let p = parameterize(1.0, 1e6, None).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let t = k as f64 / 19.0;
        let u = p.d_hat * 10f64.powf(-3.0 + t * (0.999f64.log10() + 3.0));
        let h = 1e-6 * u;
        let pn = contact_pressure(u, &p).unwrap();
        let kn = normal_stiffness(u, &p).unwrap();
        let fd_p = -central(|x| barrier_energy(x, &p).unwrap(), u, h);
        let fd_k = -central(|x| contact_pressure(x, &p).unwrap(), u, h);
        worst = worst.max(((pn - fd_p) / pn).abs()).max(((kn - fd_k) / kn).abs());
    }
    check(worst < 1e-6, format!("conjugacy error {worst:.2e}"), &mut fails);

    let eps = 1e-6;
    let u = p.d_hat * (1.0 - eps);
    // each derivative on its own scale: κ d̂² for B, κ d̂ for p_N
    let b = barrier_energy(u, &p).unwrap().abs();
    let pn = contact_pressure(u, &p).unwrap().abs();
    let k1 = normal_stiffness(u, &p).unwrap();
    let k2 = normal_stiffness(p.d_hat * (1.0 - 0.5 * eps), &p).unwrap();
    check(
        b < 1e-8 * p.kappa * p.d_hat * p.d_hat && pn < 1e-8 * p.kappa * p.d_hat,
        format!("B={b:.2e}, p_N={pn:.2e} near d_hat"),
        &mut fails,
    );
    // k_N vanishes linearly: about 6 κ ε, halving with ε
    check(
        ((k1 / (6.0 * eps * p.kappa)) - 1.0).abs() < 1e-3 && ((k2 / k1) - 0.5).abs() < 1e-3,
        format!("k_N near d_hat = {:.3e} κ", k1 / p.kappa),
        &mut fails,
    );
    let beyond = [barrier_energy(p.d_hat, &p), contact_pressure(p.d_hat, &p), normal_stiffness(p.d_hat, &p)];
    check(beyond.iter().all(|v| matches!(v, Ok(x) if *x == 0.0)), "law not zero at d_hat".into(), &mut fails);

    let s_hat = 1e-4;
    check(friction_smoothing(s_hat, s_hat) == (1.0, 0.0), "m(ŝ) != 1 or m'(ŝ) != 0".into(), &mut fails);
    let (_, left) = friction_smoothing(s_hat * (1.0 - 1e-9), s_hat);
    check(left.abs() < 1e-8 / s_hat, "m' not continuous at ŝ".into(), &mut fails);

    let c = pressure_shape(INITIAL_GAP_RATIO);
    check(format!("{c:.3}") == "2.256", format!("pressure constant {c}"), &mut fails);
    let (r, g) = minimize_g(0.05, 0.95).map_err(|e| e.to_string())?;
    check(format!("{r:.3}") == "0.376", format!("argmin g = {r}"), &mut fails);
    check(format!("{g:.2}") == "5.03", format!("min g = {g}"), &mut fails);
    check(g_function(1.5).is_err(), "g accepted r outside (0, 1)".into(), &mut fails);
    check(
        ((p.kappa * c * p.d_hat / p.p_opt) - 1.0).abs() < 1e-12,
        "kappa not consistent with p_opt".into(),
        &mut fails,
    );
    verdict(
        format!("conjugacy max rel err {worst:.1e}, constant {c:.4}, argmin {r:.4}, min g {g:.4}, k_N(d̂(1-1e-6)) = {:.2e} κ", k1 / p.kappa),
        fails,
    )
}

fn cut_setup(law: ContactLaw, integration: Integration) -> ModelSetup {
    let mesh = Mesh::structured(5, 5, 1.0, 1.0).unwrap();
    let geometry = InterfaceGeometry::line(Vec2::new(0.5, 0.47), Vec2::new(1.0, 0.3)).unwrap();
    let mut bcs = BoundaryConditions::new();
    let bottom = mesh.boundary_nodes(Boundary::Bottom);
    bcs.fix_nodes(&bottom, 0, 0.0, 0).fix_nodes(&bottom, 1, 0.0, 0);
    ModelSetup {
        mesh,
        geometry,
        materials: Materials {
            positive: Material::new(2e6, 0.3).unwrap(),
            negative: Material::new(5e6, 0.2).unwrap(),
        },
        law,
        integration,
        bcs,
    }
}

fn criterion_2() -> Outcome {
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // traction tangent on random states
    let mut worst_tangent: f64 = 0.0;
    for _ in 0..200 {
        let mu = rng.gen_range(0.0..0.8);
        let p: BarrierParams = parameterize(1.0, 1e5, None).unwrap().with_friction(mu).unwrap();
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = Vec2::new(ang.cos(), ang.sin());
        let t = Vec2::new(-n.y, n.x);
        let normal = rng.gen_range(-0.3..0.5) * p.d_hat;
        let slip = rng.gen_range(-3.0..3.0) * p.s_hat;
        let jump = n * normal + t * slip;
        let st = update_traction(jump, Vec2::zeros(), n, &p).unwrap();
        let h = 1e-7 * p.d_hat;
        let mut diff: f64 = 0.0;
        for d in 0..2 {
            let mut e = Vec2::zeros();
            e[d] = h;
            let plus = update_traction(jump + e, Vec2::zeros(), n, &p).unwrap().traction;
            let minus = update_traction(jump - e, Vec2::zeros(), n, &p).unwrap().traction;
            let fd = (plus - minus) / (2.0 * h);
            for c in 0..2 {
                diff = diff.max((st.tangent[(c, d)] - fd[c]).abs());
            }
        }
        let scale = st.tangent.abs().max().max(1e-300);
        worst_tangent = worst_tangent.max(diff / scale);
    }
    check(worst_tangent < 1e-5, format!("traction tangent error {worst_tangent:.2e}"), &mut fails);

    // assembled Jacobian on a 5 x 5 cut mesh
    let mut worst_jac: f64 = 0.0;
    for integration in [Integration::Standard, Integration::Averaged] {
        for mu in [0.0, 0.4] {
            let b = parameterize(1.0, 1e5, None).unwrap().with_friction(mu).unwrap();
            let model = Model::new(cut_setup(ContactLaw::Barrier(b), integration)).map_err(|e| e.to_string())?;
            let history = model.initial_history();
            for _ in 0..5 {
                let mut x = vec![0.0; model.dofs.n_total()];
                for (i, v) in x.iter_mut().enumerate() {
                    *v = if i < model.dofs.n_std() {
                        rng.gen_range(-1e-4..1e-4)
                    } else {
                        rng.gen_range(-0.2..0.4) * b.d_hat
                    };
                }
                let ev = model.evaluate(&x, &history, &[]).map_err(|e| e.to_string())?;
                let v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut jv = vec![0.0; x.len()];
                model.pattern().mul_add(&ev.jacobian, &v, &mut jv);
                let h = 1e-7 * b.d_hat;
                let res = |s: f64| {
                    let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * b).collect();
                    model.evaluate(&y, &history, &[]).unwrap().residual
                };
                let (rp, rm) = (res(h), res(-h));
                let num: f64 = jv
                    .iter()
                    .zip(rp.iter().zip(&rm))
                    .map(|(j, (a, b))| (j - (a - b) / (2.0 * h)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let den: f64 = jv.iter().map(|j| j * j).sum::<f64>().sqrt();
                worst_jac = worst_jac.max(num / den);
            }
        }
    }
    check(worst_jac < 1e-5, format!("Jacobian error {worst_jac:.2e}"), &mut fails);
    verdict(
        format!("tangent max rel err {worst_tangent:.1e} (200 states), Jacobian max rel err {worst_jac:.1e} (20 states)"),
        fails,
    )
}

fn oracle_pressure(u: f64, kappa: f64, d_hat: f64) -> f64 {
    if u >= d_hat {
        0.0
    } else {
        -kappa * (u - d_hat) * (-2.0 * (u / d_hat).ln() + d_hat / u - 1.0)
    }
}

fn bisect_gap(target: f64, kappa: f64, d_hat: f64) -> f64 {
    let (mut lo, mut hi) = (1e-16 * d_hat, d_hat);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_pressure(mid, kappa, d_hat) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_3(gaps: &mut GapLedger) -> Outcome {
    let mut fails = Vec::new();
    let load = 3e4;
    let (mut worst_p, mut worst_u): (f64, f64) = (0.0, 0.0);
    for integration in [Integration::Standard, Integration::Averaged] {
        let mesh = Mesh::structured(5, 5, 1.0, 1.0).unwrap();
        let mut bcs = BoundaryConditions::new();
        bcs.fix_nodes(&mesh.boundary_nodes(Boundary::Bottom), 1, 0.0, 0)
            .fix_nodes(&mesh.boundary_nodes(Boundary::Left), 0, 0.0, 0)
            .load_edges(&mesh.boundary_edges(Boundary::Top), Vec2::new(0.0, -load), 0, None);
        let model = Model::new(ModelSetup {
            mesh,
            geometry: InterfaceGeometry::horizontal(0.5),
            materials: Materials::uniform(Material::new(1e7, 0.25).unwrap()),
            law: ContactLaw::Barrier(parameterize(1.0, 2.0 * load, None).unwrap()),
            integration,
            bcs,
        })
        .map_err(|e| e.to_string())?;
        let b = *model.law.barrier().unwrap();
        let path = run_load_steps(&model, &linear_ramp(1, 1), &NewtonOptions::default(), false)
            .map_err(|e| e.to_string())?;
        if !path.report.converged() {
            fails.push(format!("{integration:?} patch test did not converge"));
            continue;
        }
        let expected = bisect_gap(load, b.kappa, b.d_hat);
        let states = path.states.last().unwrap();
        for s in states {
            worst_p = worst_p.max(((s.pressure - load) / load).abs());
            worst_u = worst_u.max(((s.gap - expected) / expected).abs());
        }
        let min = states.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
        gaps.entries.push((format!("patch test {integration:?}"), min));
    }
    check(worst_p < 1e-6, format!("pressure error {worst_p:.2e}"), &mut fails);
    check(worst_u < 1e-8, format!("gap error {worst_u:.2e}"), &mut fails);
    verdict(format!("p_N rel err {worst_p:.1e}, u_N rel err vs bisection {worst_u:.1e}"), fails)
}

fn criterion_4(gaps: &mut GapLedger) -> Outcome {
    let mut fails = Vec::new();
    let base = ProblemConfig::registry(ProblemId::HorizontalCrack);
    let study = mesh_study(&base, &[(11, 11), (25, 25), (51, 51)]).map_err(|e| e.to_string())?;
    for r in &study.runs {
        gaps.add(&format!("horizontal_crack {}x{}", r.problem.config.nx, r.problem.config.ny), r);
    }
    let names = ["uN", "uT", "pN", "tau"];
    let mut detail = Vec::new();
    for (f, name) in names.iter().enumerate() {
        let d = study.field_differences(f);
        check(strictly_decreasing(&d), format!("{name} differences {d:?} not decreasing"), &mut fails);
        detail.push(format!("{name} {:.2e}->{:.2e}", d[0], d[1]));
    }

    let dhat = dhat_study(&base, &[1e-4, 1e-3]).map_err(|e| e.to_string())?;
    for r in &dhat.runs {
        let d_hat = r.problem.barrier().unwrap().d_hat;
        gaps.add(&format!("horizontal_crack d_hat={d_hat}"), r);
        let p = r.final_profile().unwrap();
        check(p.max_gap() < d_hat, format!("max u_N {:.3e} >= d_hat {d_hat}", p.max_gap()), &mut fails);
        detail.push(format!("max u_N/d̂ {:.3}", p.max_gap() / d_hat));
    }
    let slip = dhat.slip_differences()[0];
    check(slip < 0.02, format!("slip difference {slip:.3e}"), &mut fails);
    detail.push(format!("slip diff {:.2}%", 100.0 * slip));
    verdict(detail.join(", "), fails)
}

fn criterion_5(gaps: &mut GapLedger) -> Outcome {
    let mut fails = Vec::new();
    let base = ProblemConfig::registry(ProblemId::InclinedCrack);
    let study = kappa_study(&base, 0.5).map_err(|e| e.to_string())?;
    gaps.add("inclined_crack p_opt=10MPa", &study.reference);
    gaps.add("inclined_crack p_opt=5MPa", &study.variant);
    let steps = study.reference.report.steps.len();
    check(study.reference.converged() && steps == 10, format!("{steps} steps converged"), &mut fails);
    let d_half = study.displacement_difference;
    check(d_half < 5e-3, format!("displacement difference {d_half:.3e} (p_opt / 2)"), &mut fails);

    let high = run(
        &ProblemConfig {
            p_opt: 10.0 * base.p_opt,
            ..base.clone()
        },
        false,
    )
    .map_err(|e| e.to_string())?;
    gaps.add("inclined_crack p_opt=100MPa", &high);
    let d_high = match (study.reference.final_standard_dofs(), high.final_standard_dofs()) {
        (Some(a), Some(b)) if high.converged() => max_relative_difference(a, b),
        _ => f64::INFINITY,
    };
    check(d_high < 5e-3, format!("displacement difference {d_high:.3e} (p_opt x 10)"), &mut fails);
    verdict(
        format!(
            "10/10 steps, iterations {}, max rel displacement diff {:.2e} (5 MPa), {:.2e} (100 MPa)",
            study.reference.report.total_iterations(),
            d_half,
            d_high
        ),
        fails,
    )
}

fn criterion_6(gaps: &mut GapLedger) -> Outcome {
    let mut fails = Vec::new();
    let mut detail = Vec::new();
    for contrast in [1e1, 1e7] {
        let cfg = ProblemConfig {
            stiffness_ratio: contrast,
            ..ProblemConfig::registry(ProblemId::TwoBlocks)
        };
        let barrier = run(&cfg, false).map_err(|e| e.to_string())?;
        gaps.add(&format!("two_blocks contrast {contrast:e}"), &barrier);
        let order = barrier.min_tail_order().unwrap_or(f64::NAN);
        check(barrier.converged(), format!("barrier run at contrast {contrast:e} did not converge"), &mut fails);
        check(order >= 1.7, format!("tail order {order:.2} at contrast {contrast:e}"), &mut fails);
        if let Some(p) = barrier.final_profile() {
            let (op, ot) = (profile_oscillation(p, |s| s.p_n), profile_oscillation(p, |s| s.tau));
            check(op < 0.05, format!("p_N oscillation {op:.3} at contrast {contrast:e}"), &mut fails);
            check(ot < 0.05, format!("tau oscillation {ot:.3} at contrast {contrast:e}"), &mut fails);
            detail.push(format!(
                "contrast {contrast:e}: {} its, order {order:.2}, osc p_N {op:.3}, tau {ot:.3}",
                barrier.report.total_iterations()
            ));
        }

        let hybrid = run(
            &ProblemConfig {
                method: Method::Hybrid,
                ..cfg
            },
            false,
        )
        .map_err(|e| e.to_string())?;
        let step = &hybrid.report.steps[0];
        check(
            !hybrid.converged() && step.iterations() <= 50,
            format!("hybrid run converged at contrast {contrast:e}"),
            &mut fails,
        );
        detail.push(format!("hybrid {} after {} its", step.reason.as_str(), step.iterations()));
    }
    verdict(detail.join("; "), fails)
}

fn criterion_7(gaps: &mut GapLedger) -> Outcome {
    let mut fails = Vec::new();
    let mut detail = Vec::new();
    let base = ProblemConfig::registry(ProblemId::Inclusion);
    let meshes = [(40, 40), (80, 80), (160, 160)];
    let averaged = mesh_study(&base, &meshes).map_err(|e| e.to_string())?;
    let standard = mesh_study(
        &ProblemConfig {
            integration: Integration::Standard,
            ..base.clone()
        },
        &meshes,
    )
    .map_err(|e| e.to_string())?;
    for (label, study) in [("averaged", &averaged), ("standard", &standard)] {
        for r in &study.runs {
            gaps.add(&format!("inclusion {label} {}x{}", r.problem.config.nx, r.problem.config.ny), r);
        }
    }

    let fine = averaged.runs.last().and_then(|r| r.final_profile());
    let angle = fine.and_then(separation_angle).unwrap_or(f64::NAN);
    check((angle - 55.0).abs() <= 5.0, format!("separation angle {angle:.1}"), &mut fails);
    detail.push(format!("separation at {angle:.1} deg"));

    let mut osc = Vec::new();
    for (a, s) in averaged.runs.iter().zip(&standard.runs) {
        let oa = profile_oscillation(a.final_profile().unwrap(), |p| p.p_n);
        let os = profile_oscillation(s.final_profile().unwrap(), |p| p.p_n);
        check(oa < os, format!("averaged oscillation {oa:.3} >= standard {os:.3}"), &mut fails);
        osc.push(format!("{oa:.2}<{os:.2}"));
    }
    detail.push(format!("osc p_N {}", osc.join(" ")));
    let d = averaged.field_differences(2);
    check(strictly_decreasing(&d), format!("p_N L2 differences {d:?} not decreasing"), &mut fails);
    detail.push(format!("L2 p_N {:.2e}->{:.2e}", d[0], d[1]));

    for (label, mu) in [("stiff", 0.0), ("stiff+friction", 0.3)] {
        let cfg = ProblemConfig {
            stiffness_ratio: 100.0,
            mu,
            shear_final: Some(5.0 * base.shear),
            ..base.clone()
        };
        let out = run(&cfg, false).map_err(|e| e.to_string())?;
        gaps.add(&format!("inclusion {label}"), &out);
        check(out.converged(), format!("{label} sweep did not converge"), &mut fails);
        let lengths: Vec<f64> = out.profiles.iter().map(|p| p.contact_length()).collect();
        let shrinking = lengths.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
            && lengths.last() < lengths.first();
        check(shrinking, format!("{label} contact lengths {lengths:.3?} not shrinking"), &mut fails);
        detail.push(format!(
            "{label}: {} steps, contact {:.2}->{:.2}",
            out.profiles.len(),
            lengths.first().unwrap_or(&f64::NAN),
            lengths.last().unwrap_or(&f64::NAN)
        ));
    }
    verdict(detail.join(", "), fails)
}

fn criterion_8(gaps: &GapLedger) -> Outcome {
    let bad: Vec<String> = gaps
        .entries
        .iter()
        .filter(|(_, g)| !(*g > 0.0))
        .map(|(l, g)| format!("{l}: min u_N {g:e}"))
        .collect();
    let min = gaps.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    if gaps.entries.is_empty() {
        return Err("no converged barrier runs recorded".into());
    }
    verdict(format!("{} converged barrier states, smallest u_N {min:.3e}", gaps.entries.len()), bad)
}

fn main() -> ExitCode {
    let names = [
        "barrier law unit suite",
        "consistent tangent and Jacobian",
        "uniform compression patch test",
        "horizontal crack",
        "inclined crack",
        "two blocks",
        "circular inclusion",
        "non-penetration",
    ];
    let mut gaps = GapLedger::default();
    let mut all = true;
    let mut report = |k: usize, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        let (tag, text) = match outcome {
            Ok(t) => ("PASS", t),
            Err(t) => {
                all = false;
                ("FAIL", t)
            }
        };
        println!("{tag} criterion {k} ({}): {text} [{secs:.1} s]", names[k - 1]);
    };
    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(3, t, criterion_3(&mut gaps));
    let t = Instant::now();
    report(4, t, criterion_4(&mut gaps));
    let t = Instant::now();
    report(5, t, criterion_5(&mut gaps));
    let t = Instant::now();
    report(6, t, criterion_6(&mut gaps));
    let t = Instant::now();
    report(7, t, criterion_7(&mut gaps));
    let t = Instant::now();
    report(8, t, criterion_8(&gaps));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
