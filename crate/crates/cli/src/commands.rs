use std::f64::consts::PI;

use dbar_core::dbar::{verify_dbar_with, YMatrix};
use dbar_core::equilibrium::{
    e_field_csv, effective_E, interior_samples, solve_domain, AreaPotentialMethod, EquilibriumDomain, HarmonicMoments,
};
use dbar_core::gfunction::{
    dbar_g_check, g_field_csv, jump_check, verify_proposition, verify_undressed_dbar, GFunction, GVersion,
};
use dbar_core::orthopoly::{
    compute_moments, compute_orthopolys, moment_rule, partition_function, zeros, zn_monte_carlo, OrthoPolySet,
};
use dbar_core::potential::{scale_gamma, validate};
use dbar_core::{Complex64, Domain, PolynomialCurve, Weight};
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::report::Bundle;
use crate::Failure;

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<(), Failure> {
    let mut bundle = Bundle::new(cfg.output_dir.clone().expect("resolved by caller"))?;
    let result = match command {
        Command::SolveDomain => solve_domain_cmd(cfg, &mut bundle),
        Command::Orthopoly => orthopoly_cmd(cfg, &mut bundle),
        Command::Verify => verify_cmd(cfg, &mut bundle),
        Command::GfunctionScan => gfunction_scan_cmd(cfg, &mut bundle),
    };
    let result = result.and_then(|()| match bundle.first_failure() {
        Some(c) if command == Command::Verify => Err(Failure::verification(format!(
            "check {} failed: value {:e}, tolerance {:e}",
            c.name, c.value, c.tolerance
        ))),
        _ => Ok(()),
    });
    let code = result.as_ref().err().map(|f| f.code as i32).unwrap_or(0);
    if let Err(f) = &result {
        bundle.summary.insert("error".into(), json!(f.message));
    }
    let echo = serde_json::to_value(cfg).expect("serializable");
    bundle.finish(command.name(), &echo, code)?;
    result
}

/// Solves for D₊ of the γ-scaled potential after checking admissibility.
fn equilibrium(cfg: &RunConfig, bundle: &mut Bundle) -> Result<EquilibriumDomain, Failure> {
    let w = cfg.weight()?;
    let report = validate(&w, 10_000)?;
    if !report.is_admissible() {
        let msg: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::config(format!("potential validation failed: {}", msg.join("; "))));
    }
    let scaled = scale_gamma(&w.potential, cfg.gamma)?;
    let target = HarmonicMoments::of_potential(&scaled);
    let start = PolynomialCurve::new(scaled.t0.sqrt(), vec![], cfg.quadrature.boundary)?;
    let eq = bundle.timed("solve_domain", || solve_domain(&target, cfg.degree(), Some(&start)))?;
    bundle.summary.insert("E0".into(), json!(eq.e0));
    bundle.summary.insert("E0_stddev".into(), json!(eq.e0_stddev));
    bundle.summary.insert("newton_iterations".into(), json!(eq.iterations));
    bundle.summary.insert("moment_residual".into(), json!(eq.residual));
    Ok(eq)
}

fn polys(cfg: &RunConfig, w: &Weight, n_max: usize, bundle: &mut Bundle) -> Result<OrthoPolySet, Failure> {
    let rule = moment_rule(w, n_max, 1)?;
    let m = bundle.timed("moments", || compute_moments(w, n_max, &rule))?;
    Ok(compute_orthopolys(&m, cfg.big_n)?)
}

/// Uniform `side × side` grid over `[x0, x1] × [y0, y1]` filtered by `keep`.
fn grid(bbox: [f64; 4], side: usize, keep: impl Fn(Complex64) -> bool) -> Vec<Complex64> {
    let [x0, x1, y0, y1] = bbox;
    let mut out = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            let z = Complex64::new(
                x0 + (x1 - x0) * i as f64 / (side - 1) as f64,
                y0 + (y1 - y0) * j as f64 / (side - 1) as f64,
            );
            if keep(z) {
                out.push(z);
            }
        }
    }
    out
}

fn padded_box(d: &Domain, factor: f64) -> [f64; 4] {
    let [x0, x1, y0, y1] = d.bounding_box();
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let (hx, hy) = ((x1 - x0) / 2.0 * factor, (y1 - y0) / 2.0 * factor);
    [cx - hx, cx + hx, cy - hy, cy + hy]
}

/// `c + ρ(b(θ) − c)` on the boundary rays of `d`.
fn rays(d: &Domain, rho: &[f64], count: usize, phase: f64) -> Vec<Complex64> {
    let c = d.centroid();
    let b = d.boundary();
    let mut out = Vec::new();
    for (i, r) in rho.iter().enumerate() {
        for j in 0..count {
            let th = phase + 2.0 * PI * (j as f64 + 0.37 * i as f64) / count as f64;
            out.push(c + (b.point(th) - c) * *r);
        }
    }
    out
}

fn solve_domain_cmd(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), Failure> {
    let eq = equilibrium(cfg, bundle)?;
    bundle.json("curve.json", &eq.to_json())?;
    let plus = eq.domain();
    let pts = grid(padded_box(&plus, 1.6), cfg.scan_grid, |z| plus.distance_to_boundary(z) > 1e-6);
    let csv = bundle.timed("e_field", || e_field_csv(&eq, &eq.potential, &pts))?;
    bundle.csv("e_field.csv", csv)?;
    let tol = cfg.tolerances.constancy;
    bundle.check("E_constancy_stddev", eq.e0_stddev, tol, eq.e0_stddev < tol);
    Ok(())
}

fn orthopoly_cmd(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), Failure> {
    let w = cfg.weight()?;
    let n_max = cfg.n_max().max(cfg.big_n.saturating_sub(1));
    let set = polys(cfg, &w, n_max, bundle)?;

    let mut norms = String::from("n,h_n,log_h_n\n");
    for &n in &cfg.n_list {
        norms.push_str(&format!("{n},{:.16e},{:.16e}\n", set.norms[n], set.log_norms[n]));
    }
    bundle.csv("norms.csv", norms)?;
    bundle.json("coefficients.json", &set.to_json())?;

    let log_z = partition_function(&set, cfg.big_n)?;
    bundle.summary.insert("log_Z_N".into(), json!(log_z));
    let mut part = String::from("N,log_z_lemma,log_z_mc,stderr,z_score\n");
    if cfg.mc_samples > 0 {
        let seed = cfg.seed.expect("checked with mc_samples");
        let mc = bundle.timed("monte_carlo", || zn_monte_carlo(&w, cfg.big_n, cfg.mc_samples, seed))?;
        let z = (log_z - mc.log_z).abs() / mc.stderr;
        part.push_str(&format!("{},{:.16e},{:.16e},{:.16e},{:.16e}\n", cfg.big_n, log_z, mc.log_z, mc.stderr, z));
        bundle.check("lemma_vs_monte_carlo_sigma", z, 3.0, z < 3.0);
    } else {
        part.push_str(&format!("{},{:.16e},,,\n", cfg.big_n, log_z));
    }
    bundle.csv("partition.csv", part)?;

    let mut zs = String::from("n,k,re,im\n");
    for &n in cfg.n_list.iter().filter(|n| **n > 0) {
        for (k, z) in zeros(&set, n)?.iter().enumerate() {
            zs.push_str(&format!("{n},{k},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    bundle.csv("zeros.csv", zs)?;
    Ok(())
}

/// Degree of the undressing check, `n = γN` when that is a positive integer.
fn undress_degree(cfg: &RunConfig) -> Option<usize> {
    let n = cfg.gamma * cfg.big_n as f64;
    let r = n.round();
    (r >= 1.0 && (n - r).abs() < 1e-12).then_some(r as usize)
}

fn verify_cmd(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), Failure> {
    let tol = cfg.tolerances.clone();
    let step = cfg.fd_step;
    let w = cfg.weight()?;
    let eq = equilibrium(cfg, bundle)?;
    let plus = eq.domain();
    let n_und = undress_degree(cfg);
    let n_max = cfg.n_max().max(n_und.unwrap_or(0)).max(1);
    let set = polys(cfg, &w, n_max, bundle)?;
    let (radial, angular) = (cfg.quadrature.area[0], cfg.quadrature.area[1]);

    // ∂̄Y_n at interior points of D that leave room for the stencil; where
    // e^{−NV} is below 1e-6 the right-hand side sinks under the FD noise
    let margin = 10.0 * step * 1.01;
    let d_pts: Vec<Complex64> = rays(&w.cutoff, &[0.15, 0.4, 0.65, 0.9], 6, 0.3)
        .into_iter()
        .filter(|z| w.cutoff.distance_to_boundary(*z) > margin && w.density(*z) >= 1e-6)
        .collect();
    for &n in cfg.n_list.iter().filter(|n| **n > 0) {
        let y = YMatrix::new(n, &w, &set, radial.max(64 + 4 * n), angular)?;
        let err = if d_pts.is_empty() {
            f64::INFINITY
        } else {
            bundle.timed(&format!("dbar_Y_{n}"), || verify_dbar_with(&y, &d_pts, step))?.max_rel_err
        };
        bundle.check(format!("dbar_Y_n{n}"), err, tol.dbar, err < tol.dbar);
    }

    bundle.check("E_constancy_stddev", eq.e0_stddev, tol.constancy, eq.e0_stddev < tol.constancy);
    let mut excess = f64::INFINITY;
    for z in rays(&plus, &[1.02, 1.2, 1.5, 2.0], 12, 0.1).into_iter().filter(|z| w.cutoff.contains(*z).unwrap_or(false)) {
        excess = excess.min(effective_E(&eq, &eq.potential, z)? - eq.e0);
    }
    if excess.is_finite() {
        bundle.check("min_E_minus_E0_on_D_minus_Dplus", excess, -1e-8, excess >= -1e-8);
    }

    let g1 = GFunction::new(GVersion::V1, &eq, 0.0)?;
    let g2 = GFunction::new(GVersion::V2, &eq, 0.0)?;
    let a = &g1.anchor;
    let loop_err = (a.loop_value() - Complex64::new(0.0, 2.0 * plus.area())).norm();
    bundle.check("omega_loop_value", loop_err, tol.omega, loop_err < tol.omega);
    let re0 = a.omega0_values.iter().map(|o| o.re.abs()).fold(0.0, f64::max);
    bundle.check("omega0_imaginary", re0, 1e-12, re0 < 1e-12);

    let lp = eq.log_potential();
    let mut ap = rays(&plus, &[0.2, 0.5, 0.8, 0.95], 5, 0.2);
    ap.extend(rays(&plus, &[1.05, 1.3, 2.0, 3.0], 5, 0.45));
    let mut ap_err = 0.0f64;
    for z in ap {
        let (x, y) = (lp.eval(z, AreaPotentialMethod::Direct)?, lp.eval(z, AreaPotentialMethod::Contour)?);
        ap_err = ap_err.max((x - y).abs());
    }
    bundle.check("area_potential_two_way", ap_err, tol.area_potential, ap_err < tol.area_potential);

    let inside = interior_samples(&eq, 5, 8, 0.9);
    let outside: Vec<Complex64> = rays(&plus, &[1.1, 1.6, 2.5], 8, 0.2)
        .into_iter()
        .filter(|z| g1.distance_to_cut(*z) > margin)
        .collect();
    let mut prop_pts = inside.clone();
    prop_pts.extend(&outside);
    let mut means = Vec::new();
    for (name, gf) in [("V1", &g1), ("V2", &g2)] {
        let rep = bundle.timed(&format!("proposition_{name}"), || verify_proposition(gf, &eq.potential, &prop_pts))?;
        let mean_err = (rep.interior_mean - eq.e0).abs();
        bundle.check(format!("proposition_{name}_interior_stddev"), rep.interior_stddev, tol.constancy, rep.interior_stddev < tol.constancy);
        bundle.check(format!("proposition_{name}_interior_mean"), mean_err, tol.constancy, mean_err < tol.constancy);
        bundle.check(format!("proposition_{name}_exterior"), rep.exterior_max_err, tol.constancy, rep.exterior_max_err < tol.constancy);
        means.push(rep.interior_mean);
    }
    let dv = (means[0] - means[1]).abs();
    bundle.check("proposition_V1_V2_agree", dv, 1e-4, dv < 1e-4);

    let gin = inside.iter().copied().filter(|z| plus.distance_to_boundary(*z) > margin).collect::<Vec<_>>();
    let rin = dbar_g_check(&g2, &gin, step)?.max_rel_err;
    bundle.check("gextra_inside_rel", rin, tol.gextra, rin < tol.gextra);
    let rout = dbar_g_check(&g2, &outside, step)?.max_abs_err;
    bundle.check("gextra_outside_abs", rout, 1e-6, rout < 1e-6);

    let thetas: Vec<f64> = (0..12).map(|k| 0.25 + 0.5 * k as f64).collect();
    let n_jump = n_und.unwrap_or(1) as u32;
    for (name, gf) in [("V1", &g1), ("V2", &g2)] {
        let m: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|e| jump_check(gf, &thetas, *e, n_jump).map(|r| r.max_mismatch))
            .collect::<Result<_, _>>()?;
        let ratio = m[1] / m[0];
        bundle.check(format!("jump_{name}_monotone"), ratio, 1.0, m[0] > m[1] && m[1] > m[2]);
    }

    if let Some(n) = n_und {
        let y = YMatrix::new(n, &w, &set, radial.max(64 + 4 * n), angular)?;
        let mut pts = rays(&plus, &[0.15, 0.45, 0.75], 10, 0.25);
        pts.extend(
            rays(&plus, &[1.15, 1.45, 1.8], 10, 0.25)
                .into_iter()
                .filter(|z| w.cutoff.contains(*z).unwrap_or(false) && w.cutoff.distance_to_boundary(*z) > margin),
        );
        let pts: Vec<Complex64> = pts
            .into_iter()
            .filter(|z| plus.distance_to_boundary(*z) > margin && g2.distance_to_cut(*z) > margin)
            .collect();
        let rep = bundle.timed("undressed_dbar", || verify_undressed_dbar(&y, &g2, &pts, step))?;
        bundle.check("undressed_V2_Dplus", rep.plus.max_rel_err, tol.undress, rep.plus.max_rel_err < tol.undress);
        if !rep.remainder.points.is_empty() {
            let e = rep.remainder.max_rel_err;
            bundle.check("undressed_V2_D_minus_Dplus", e, tol.undress, e < tol.undress);
        }
        bundle.json("undressed_dbar.json", &serde_json::to_value(&rep).expect("serializable"))?;
    }
    Ok(())
}

fn gfunction_scan_cmd(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), Failure> {
    let eq = equilibrium(cfg, bundle)?;
    let plus = eq.domain();
    let n = undress_degree(cfg).unwrap_or(1) as u32;
    let thetas: Vec<f64> = (0..64).map(|k| 2.0 * PI * (k as f64 + 0.5) / 64.0).collect();
    for (name, v) in [("v1", GVersion::V1), ("v2", GVersion::V2)] {
        let gf = GFunction::new(v, &eq, 0.0)?;
        let pts = grid(padded_box(&plus, 2.0), cfg.scan_grid, |z| {
            plus.distance_to_boundary(z) > 1e-6 && gf.distance_to_cut(z) > 1e-6
        });
        let csv = bundle.timed(&format!("g_field_{name}"), || g_field_csv(&gf, &pts))?;
        bundle.csv(&format!("g_field_{name}.csv"), csv)?;
        let jr = jump_check(&gf, &thetas, cfg.fd_step, n)?;
        bundle.summary.insert(format!("jump_{name}_max_mismatch"), json!(jr.max_mismatch));
        bundle.summary.insert(format!("jump_{name}_sign"), json!(jr.sign));
        bundle.csv(&format!("jump_{name}.csv"), jr.to_csv())?;
    }
    Ok(())
}
