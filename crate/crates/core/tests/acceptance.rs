//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sshg_core::action::{el_residual, evaluate_j, gradient_j, hess_vec, ActionParams};
use sshg_core::minmax::{
    coercivity_probe, geometrically_distinct, run_linking, run_mountain_pass, CylinderShape, DeformOutcome,
    MinmaxConfig, MinmaxMode, MountainPassRun, PsDiagnostics, SolutionRecord,
};
use sshg_core::nehari::{constraint_norm, fiber_solve, FiberOperator};
use sshg_core::spectral::{
    clifford_generators, dirac_apply, h1_inner, hhalf_inner, omega_mult, quaternion_j, ScalarField, SpectralBasis,
    SpinorField, TorusGeometry,
};
use sshg_core::sweepout::{
    build_sweepout_chi, equivariant_disk_minmax, equivariant_family, orthogonal_restart, DiskShape,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn basis(grid: usize, delta: [f64; 2]) -> SpectralBasis {
    SpectralBasis::build_full(TorusGeometry::standard(grid, delta).unwrap()).unwrap()
}

fn random_spinor(b: &SpectralBasis, rng: &mut ChaCha8Rng) -> SpinorField {
    SpinorField {
        coeffs: (0..b.n_slots())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    }
}

fn smooth_point(b: &SpectralBasis, rng: &mut ChaCha8Rng) -> (ScalarField, SpinorField) {
    let a: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    let u = b.scalar_from_fn(|x| {
        a[0] + a[1] * x[0].cos() + a[2] * (x[1] + x[0]).sin() + a[3] * (2.0 * x[1]).cos() + a[4] * (x[0] - 2.0 * x[1]).sin()
    });
    let mut psi = b.spinor_zeros();
    for (slot, lam) in b.slot_lambda().iter().enumerate() {
        if lam.abs() < 3.0 {
            psi.coeffs[slot] = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        }
    }
    (u, psi)
}

/// Sorted `|k + δ|·2π/L` over the integer lattice, each value twice (real multiplicity).
fn lattice_oracle(delta: [f64; 2], side: f64, count: usize) -> (Vec<f64>, usize) {
    let kappa = 2.0 * PI / side;
    let mut pos = Vec::new();
    let mut harmonic = 0;
    for k1 in -12i32..=12 {
        for k2 in -12i32..=12 {
            let xi = [k1 as f64 + delta[0], k2 as f64 + delta[1]];
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() * kappa;
            if r == 0.0 {
                // two spinor components, each with a real and an imaginary direction
                harmonic += 4;
            } else {
                pos.push(r);
                pos.push(r);
            }
        }
    }
    pos.sort_by(f64::total_cmp);
    pos.truncate(count);
    (pos, harmonic)
}

fn spectrum_conformance() -> Check {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for delta in TorusGeometry::all_spin_structures() {
        let b = basis(32, delta);
        let (oracle, h) = lattice_oracle(delta, b.geometry().side_length, 40);
        if b.harmonic_dim() != h {
            return Err(format!("delta {delta:?}: harmonic dim {} vs {h}", b.harmonic_dim()));
        }
        if b.positive_eigen().len() < 40 || b.negative_eigen().len() < 40 {
            return Err(format!("delta {delta:?}: fewer than 40 eigenvalues of each sign"));
        }
        for (j, want) in oracle.iter().enumerate() {
            let p = b.positive_eigen()[j].value;
            let n = b.negative_eigen()[j].value;
            worst = worst.max((p - want).abs() / want).max((n + want).abs() / want);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(worst <= 1e-10 && secs < 5.0, format!("max rel err {worst:.2e}, harmonic dims ok, {secs:.2} s"))
}

fn operator_algebra() -> Check {
    let t = Instant::now();
    let g = clifford_generators();
    for i in 0..2 {
        for j in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for m in 0..2 {
                        s += g[i][r][m] * g[j][m][c] + g[j][r][m] * g[i][m][c];
                    }
                    let want = if i == j && r == c { -2.0 } else { 0.0 };
                    if s != Complex64::new(want, 0.0) {
                        return Err(format!("Clifford relation fails at ({i},{j},{r},{c}): {s}"));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sa, mut om, mut jc, mut pv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let bases: Vec<_> = TorusGeometry::all_spin_structures().into_iter().map(|d| basis(32, d)).collect();
    for k in 0..100 {
        let b = &bases[k % 4];
        let p = random_spinor(b, &mut rng);
        let q = random_spinor(b, &mut rng);
        let dp = dirac_apply(&p, b).unwrap();
        let dq = dirac_apply(&q, b).unwrap();
        // grid quadrature, independent of the coefficient inner product
        let lhs = b.integrate(&b.spinor_pairing(&dp, &q));
        let rhs = b.integrate(&b.spinor_pairing(&p, &dq));
        sa = sa.max((lhs - rhs).abs() / (dp.norm_l2() * q.norm_l2()));
        let wd = dirac_apply(&omega_mult(&p, b), b).unwrap().add(&omega_mult(&dp, b));
        om = om.max(wd.norm_l2() / dp.norm_l2());
        let jd = dirac_apply(&quaternion_j(&p, b), b).unwrap().sub(&quaternion_j(&dp, b));
        jc = jc.max(jd.norm_l2() / dp.norm_l2());
        let grid = b.integrate(&b.spinor_density(&p));
        let coeff = p.dot_l2(&p);
        pv = pv.max((grid - coeff).abs() / coeff);
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(
        sa.max(om).max(jc).max(pv) <= 1e-11 && secs < 10.0,
        format!("Clifford exact; self-adjoint {sa:.1e}, omega {om:.1e}, j {jc:.1e}, Parseval {pv:.1e}; {secs:.2} s"),
    )
}

fn variational_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let deltas = TorusGeometry::all_spin_structures();
    let bases: Vec<_> = deltas.iter().map(|&d| basis(32, d)).collect();
    let (mut fd_err, mut sym_err, mut j_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..20 {
        let b = &bases[k % 4];
        let p = loop {
            let p = ActionParams::new(rng.gen_range(0.3..1.8)).unwrap();
            if b.check_rho(p.rho).is_ok() {
                break p;
            }
        };
        let (u, psi) = smooth_point(b, &mut rng);
        let (v, phi) = smooth_point(b, &mut rng);
        let exact = gradient_j(&u, &psi, &p, b).unwrap().pair(&v, &phi, b);
        let h = 1e-4;
        let mut up = u.clone();
        up.axpy(h, &v);
        let mut um = u.clone();
        um.axpy(-h, &v);
        let jp = evaluate_j(&up, &psi.add(&phi.scaled(h)), &p, b).unwrap();
        let jm = evaluate_j(&um, &psi.sub(&phi.scaled(h)), &p, b).unwrap();
        fd_err = fd_err.max(((jp - jm) / (2.0 * h) - exact).abs() / exact.abs().max(1.0));

        let (w, chi) = smooth_point(b, &mut rng);
        let a = hess_vec(&u, &psi, &v, &phi, &p, b).unwrap().pair(&w, &chi, b);
        let c = hess_vec(&u, &psi, &w, &chi, &p, b).unwrap().pair(&v, &phi, b);
        sym_err = sym_err.max((a - c).abs() / a.abs().max(1.0));

        let j0 = evaluate_j(&u, &psi, &p, b).unwrap();
        let jn = evaluate_j(&u.neg(), &psi, &p, b).unwrap();
        let jj = evaluate_j(&u, &quaternion_j(&psi, b), &p, b).unwrap();
        j_err = j_err.max((j0 - jn).abs().max((j0 - jj).abs()) / j0.abs().max(1.0));
    }
    ensure(
        fd_err <= 1e-6 && sym_err <= 1e-9 && j_err <= 1e-12,
        format!("gradient vs FD {fd_err:.1e}, hess symmetry {sym_err:.1e}, J symmetries {j_err:.1e}"),
    )
}

fn nehari_certification() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = basis(32, [0.5, 0.5]);
    let p = ActionParams::new(0.5).unwrap();
    let random_u = |rng: &mut ChaCha8Rng| {
        let a: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        b.scalar_from_fn(|x| a[0] + a[1] * x[0].sin() + a[2] * x[1].cos() + a[3] * (x[0] - x[1]).cos() + a[4] * (2.0 * x[0]).sin())
    };
    let random_free = |rng: &mut ChaCha8Rng| {
        let mut psi = b.spinor_zeros();
        for (slot, lam) in b.slot_lambda().iter().enumerate() {
            if *lam >= 0.0 && *lam < 4.0 {
                psi.coeffs[slot] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        // unit H^{1/2} norm
        psi.scaled(1.0 / hhalf_inner(&psi, &psi, &b).sqrt())
    };
    let (mut res, mut zero_minus, mut lin, mut margin): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::INFINITY);
    let mut even = true;
    for _ in 0..50 {
        let u = random_u(&mut rng);
        let f1 = random_free(&mut rng);
        let f2 = random_free(&mut rng);
        let n1 = fiber_solve(&u, &f1, &p, &b).map_err(|e| e.to_string())?;
        res = res.max(constraint_norm(&n1.u, &n1.psi, &p, &b).unwrap());

        let z = fiber_solve(&b.scalar_zeros(), &f1, &p, &b).unwrap();
        zero_minus = zero_minus.max(z.split.minus.max_abs_coeff());

        let (a, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let n2 = fiber_solve(&u, &f2, &p, &b).unwrap();
        let mut comb = f1.scaled(a);
        comb.axpy(c, &f2);
        let n12 = fiber_solve(&u, &comb, &p, &b).unwrap();
        let mut want = n1.split.minus.scaled(a);
        want.axpy(c, &n2.split.minus);
        lin = lin.max(n12.split.minus.sub(&want).norm_l2() / want.norm_l2().max(1e-300));

        let nm = fiber_solve(&u.neg(), &f1, &p, &b).unwrap();
        even &= nm.psi == n1.psi;

        let op = FiberOperator::new(&u, &p, &b).unwrap();
        let mut phi = b.spinor_zeros();
        for (s, lam) in b.slot_lambda().iter().enumerate() {
            if *lam < 0.0 {
                phi.coeffs[s] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        margin = margin.min(-op.rayleigh_quotient(&phi));
    }
    ensure(
        res <= 1e-10 && zero_minus <= 1e-12 && lin <= 1e-10 && even && margin > 0.0,
        format!("residual {res:.1e}, psi- at u=0 {zero_minus:.1e}, linearity {lin:.1e}, even {even}, margin {margin:.3}"),
    )
}

fn semi_trivial() -> Check {
    let b = basis(32, [0.5, 0.5]);
    let lambda1 = 0.5f64.sqrt();
    let got = b.eigenvalue(1).unwrap();
    if (got - lambda1).abs() > 1e-12 {
        return Err(format!("lambda_1 = {got}, lattice gives {lambda1}"));
    }
    let p = ActionParams::new(lambda1).unwrap();
    let psi = b.eigenspinor(1).unwrap();
    let r = el_residual(&b.scalar_zeros(), &psi, &p, &b).unwrap();
    let worst = r.res_u.max(r.res_psi);
    ensure(worst <= 1e-10 && psi.norm_l2() > 0.5, format!("el residual {worst:.1e} at rho = lambda_1"))
}

/// Multiplier and dual norms at the final iterate of a converged run, and bounded traces.
fn fidelity(label: &str, rec: &SolutionRecord, diag: &PsDiagnostics, newton_tol: f64) -> Check {
    let ok = rec.multiplier_norm <= 10.0 * newton_tol && rec.alpha_norm <= 1e-6 && rec.beta_norm <= 1e-6 && diag.bounded;
    ensure(
        ok,
        format!(
            "{label}: |phi| {:.1e}, alpha {:.1e}, beta {:.1e}, bounded {}",
            rec.multiplier_norm, rec.alpha_norm, rec.beta_norm, diag.bounded
        ),
    )
}

fn full_diagnostics(o: &DeformOutcome) -> bool {
    let d = &o.diagnostics;
    let n = d.len();
    n > 0
        && [d.alpha_norm.len(), d.beta_norm.len(), d.multiplier_norm.len(), d.energies.len(), d.norms_trace.len(), d.grad_norm.len()]
            .iter()
            .all(|&m| m == n)
        && !o.trace.is_empty()
}

fn mountain_pass(b: &SpectralBasis, cfg: &MinmaxConfig) -> (Check, Option<MountainPassRun>) {
    let t = Instant::now();
    let p = ActionParams::new(0.5).unwrap();
    let run = match run_mountain_pass(&p, b, cfg) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), None),
    };
    let rec = &run.outcome.record;
    let psi_norm = hhalf_inner(&rec.point.psi, &rec.point.psi, b).sqrt();
    // J(ū, sΨ₁) for constant ū and an L²-unit eigenspinor
    let (lambda1, vol) = (0.5f64.sqrt(), b.geometry().volume());
    let closed = 8.0 * run.s * run.s * (lambda1 - p.rho * run.u_bar.cosh()) + 4.0 * p.rho * p.rho * run.u_bar.sinh().powi(2) * vol;
    let direct = evaluate_j(&b.scalar_constant(run.u_bar), &b.eigenspinor(1).unwrap().scaled(run.s), &p, b).unwrap();
    let margin = coercivity_probe(&p, b, 0.05, cfg.tau, 100, cfg.seed).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let ok = rec.res_u <= 1e-6
        && rec.res_psi <= 1e-6
        && rec.level > 0.0
        && psi_norm > 1e-3
        && closed < 0.0
        && (direct - closed).abs() <= 1e-9 * closed.abs()
        && margin > 0.0
        && secs < 600.0;
    let msg = format!(
        "c1 = {:.10}, res {:.1e}/{:.1e}, |psi| {psi_norm:.3}, J(end) = {closed:.4}, probe margin {margin:.4}, {secs:.1} s",
        rec.level, rec.res_u, rec.res_psi
    );
    (ensure(ok, msg), Some(run))
}

fn linking(b: &SpectralBasis, cfg: &MinmaxConfig) -> (Check, Option<DeformOutcome>) {
    let p = ActionParams::new(1.0).unwrap();
    let run = match run_linking(&p, b, cfg, CylinderShape::default()) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), None),
    };
    let c = run.constants;
    let vol = b.geometry().volume();
    // lattice: λ_k = |(½,½)|, λ_{k+1} = |(½,3/2)| at ρ = 1
    let (lk, lk1) = (0.5f64.sqrt(), 2.5f64.sqrt());
    let mut ok = (c.lambda_k - lk).abs() < 1e-12 && (c.lambda_k1 - lk1).abs() < 1e-12;
    let (t, a, r) = (c.t, c.a, c.r);
    let axis = |s: f64| 4.0 * vol * s.sinh().powi(2) + 8.0 * (lk1 - s.cosh()) * a * a * s * s;
    let peak = (0..=200_000).map(|i| axis(t * i as f64 / 200_000.0)).fold(f64::NEG_INFINITY, f64::max);
    let cert = [
        t.cosh() - lk1 > 1.0,
        4.0 * vol * t.sinh().powi(2) - 8.0 * a * a * t * t * (t.cosh() - lk1) < 0.0,
        (1.0 - lk) / (lk + 1.0) * r * r > peak,
    ];
    ok &= cert.iter().all(|&x| x);
    ok &= run.boundary_max <= 1e-9;
    ok &= full_diagnostics(&run.outcome);
    let rec = &run.outcome.record;
    let mut msg = format!(
        "certificates {cert:?}, boundary max {:.2e}, level {:.6}, converged {}",
        run.boundary_max, rec.level, run.outcome.converged
    );
    if run.outcome.converged {
        let margin = coercivity_probe(&p, b, cfg.r0, cfg.tau, 100, cfg.seed).unwrap();
        ok &= rec.res_u <= 1e-5 && rec.res_psi <= 1e-5 && rec.level >= margin * cfg.r0 * cfg.r0;
        msg += &format!(", res {:.1e}/{:.1e}, probe bound {:.2e}", rec.res_u, rec.res_psi, margin * cfg.r0 * cfg.r0);
    }
    (ensure(ok, msg), Some(run.outcome))
}

fn sweepout_family(mp: Option<&MountainPassRun>) -> Check {
    let b = basis(128, [0.5, 0.5]);
    let geom = *b.geometry();
    let eps = 0.05 * geom.volume();
    let chi = build_sweepout_chi(&geom, eps).map_err(|e| e.to_string())?;
    let (mut id, mut anti, mut area): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for v in chi.grid_values(0.0, &geom) {
        id = id.max((v - 1.0).abs());
    }
    for k in 0..64 {
        let theta = 2.0 * PI * k as f64 / 64.0;
        let a = chi.grid_values(theta, &geom);
        let c = chi.grid_values(theta + PI, &geom);
        for (x, y) in a.iter().zip(&c) {
            anti = anti.max((x + y).abs());
        }
        let cells = a.iter().filter(|v| v.abs() < 1.0).count();
        area = area.max(cells as f64 * (geom.side_length / geom.grid_n as f64).powi(2));
    }
    let p = ActionParams::new(0.5).unwrap();
    let (u_bar, s) = match mp {
        Some(r) => (r.u_bar, r.s),
        None => return Err("mountain-pass endpoint unavailable".into()),
    };
    let fam = equivariant_family(u_bar, s, &chi, &p, &b, 32).map_err(|e| e.to_string())?;
    let mut max_j = f64::NEG_INFINITY;
    let mut worst_cert: f64 = 0.0;
    for pt in &fam.points {
        max_j = max_j.max(evaluate_j(&pt.u, &pt.psi, &p, &b).unwrap());
        let scale = hhalf_inner(&pt.psi, &pt.psi, &b).sqrt().max(1.0);
        worst_cert = worst_cert.max(constraint_norm(&pt.u, &pt.psi, &p, &b).unwrap() / scale);
    }
    ensure(
        id <= 1e-12 && anti <= 1e-12 && area < eps && max_j < 0.0 && worst_cert <= 1e-10,
        format!(
            "(i) {id:.1e}, (ii) {anti:.1e}, interface {area:.3} < eps {eps:.3}, family max J {max_j:.3}, constraint {worst_cert:.1e}"
        ),
    )
}

struct Multiplicity {
    check: Check,
    runs: Vec<(String, SolutionRecord, PsDiagnostics, bool)>,
}

fn multiplicity(b: &SpectralBasis, cfg: &MinmaxConfig, mp: Option<&MountainPassRun>) -> Multiplicity {
    let fail = |e: String| Multiplicity { check: Err(e), runs: vec![] };
    let Some(mp) = mp else { return fail("mountain-pass record unavailable".into()) };
    let p = ActionParams::new(0.5).unwrap();
    let c1 = mp.outcome.record.level;
    let chi = match build_sweepout_chi(b.geometry(), 0.2 * b.geometry().volume()) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let fam = match equivariant_family(mp.u_bar, mp.s, &chi, &p, b, 32) {
        Ok(f) => f,
        Err(e) => return fail(e.to_string()),
    };
    let disk = match equivariant_disk_minmax(&fam, cfg, DiskShape::default(), &p, b) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    let mut runs = vec![("disk".to_string(), disk.record.clone(), disk.outcome.diagnostics.clone(), disk.outcome.converged)];
    let c2 = disk.c2;
    let mut ok = c2 >= c1 - 1e-9;
    let mut msg = format!("c1 = {c1:.8}, c2 = {c2:.8}");
    let second = if (c2 - c1).abs() <= 1e-6 {
        match orthogonal_restart(&mp.outcome.record.point.u, &fam, cfg, &p, b) {
            Ok(rs) => {
                let inner = h1_inner(&mp.outcome.record.point.u, &rs.record.point.u, b);
                ok &= inner.abs() <= 1e-8;
                msg += &format!(", restart level {:.8}, <u,u1>_H1 {inner:.1e}", rs.record.level);
                runs.push(("restart".into(), rs.record.clone(), rs.outcome.diagnostics.clone(), rs.outcome.converged));
                rs.record
            }
            Err(e) => return fail(format!("{msg}, restart failed: {e}")),
        }
    } else {
        disk.record
    };
    let distinct = geometrically_distinct(&mp.outcome.record, &second, b);
    ok &= distinct;
    msg += &format!(", distinct {distinct}");
    Multiplicity {
        check: ensure(ok, msg),
        runs,
    }
}

fn main() {
    let start = Instant::now();
    let cfg = MinmaxConfig::default();
    let half = basis(32, [0.5, 0.5]);

    let mut results: Vec<(&str, Check)> = vec![
        ("1 spectrum conformance", spectrum_conformance()),
        ("2 operator algebra", operator_algebra()),
        ("3 variational consistency", variational_consistency()),
        ("4 Nehari certification", nehari_certification()),
        ("5 semi-trivial solutions", semi_trivial()),
    ];
    let (mp_check, mp) = mountain_pass(&half, &cfg);
    results.push(("6 mountain-pass run", mp_check));
    let link_cfg = MinmaxConfig {
        mode: MinmaxMode::Linking,
        ..cfg
    };
    let (link_check, link) = linking(&half, &link_cfg);
    results.push(("7 linking geometry", link_check));
    results.push(("8 sweepout and loop", sweepout_family(mp.as_ref())));
    let multi = multiplicity(&half, &cfg, mp.as_ref());
    results.push(("9 multiplicity pipeline", multi.check));

    let mut converged = Vec::new();
    if let Some(r) = &mp {
        converged.push(("mountain pass".to_string(), r.outcome.record.clone(), r.outcome.diagnostics.clone(), r.outcome.converged));
    }
    if let Some(o) = &link {
        converged.push(("linking".to_string(), o.record.clone(), o.diagnostics.clone(), o.converged));
    }
    converged.extend(multi.runs);
    let checks: Vec<Check> = converged
        .iter()
        .filter(|(_, _, _, c)| *c)
        .map(|(l, r, d, _)| fidelity(l, r, d, cfg.newton_tol))
        .collect();
    let fidelity_check = if checks.is_empty() {
        Err("no converged run to check".into())
    } else {
        let msg = checks.iter().map(|c| c.as_ref().unwrap_or_else(|e| e).clone()).collect::<Vec<_>>().join("; ");
        ensure(checks.iter().all(Result::is_ok), msg)
    };
    results.push(("10 diagnostics fidelity", fidelity_check));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(m) => println!("PASS  {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL  {name}: {m}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
