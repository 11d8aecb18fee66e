//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero on any FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use cubacode_core::constellation::{
    build_catalog_code, catalog, catalog_names, normalize_energy, resolution, AmplitudePoint, CodeSpec, Params, Rotation,
    WeightedConstellation,
};
use cubacode_core::fock::{
    apply_annihilation, codeword_vectors, coherent_fock, coherent_tail, evaluate_point, linear_grid, optimal_scale,
    FockSpace,
};
use cubacode_core::klcheck::{code_parameters, coherent_overlap, kl_report, ladder_matrix_element, DEFAULT_CEILING};
use cubacode_core::moments::{
    design_degree, indices_up_to, is_spherical_design, moment_match_degree, shell_integral,
    size_bounds, sphere_monomial_integral, code_bounds, Domain, MultiIndex, MOMENT_TOL,
};
use cubacode_core::stabilizer::{containment_witness, verify_xtype, verify_ztype, ztype_polynomials, AnnihilationPolynomial};
use cubacode_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn all_catalog_codes() -> Vec<CodeSpec> {
    catalog_names()
        .iter()
        .map(|(name, _)| {
            let params = match *name {
                "polygon_shells" => Params::new().set("m", 5.0).set_list("radii", &[1.0, 1.5]),
                _ => Params::new(),
            };
            build_catalog_code(name, &params).unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let cases = [
        (catalog::cat(8, 2), (8, 8, 8)),
        (catalog::cat(12, 2), (12, 12, 12)),
        (catalog::cell16_qutrit(), (2, 4, 4)),
        (catalog::cube_orthoplex(4, 2), (5, 6, 12)),
        (catalog::polygon_shells(6, &[1.0, 2.0], 2), (7, 8, 18)),
        (catalog::polygon_shells(4, &[1.0, 2.0, 3.0], 2), (6, 8, 12)),
        (catalog::twoshell_24cell(2.0), (6, 8, 12)),
    ];
    let mut seen = Vec::new();
    for (code, want) in cases {
        let code = code.map_err(|e| e.to_string())?;
        let t = code_parameters(&code, DEFAULT_CEILING, MOMENT_TOL).map_err(|e| e.to_string())?;
        check((t.t_down, t.d_updown, t.d_down) == want, format!("{}: got {t}, want {want:?}", code.name()))?;
        seen.push(t.to_string());
    }
    Ok(seen.join(" "))
}

fn criterion_2() -> Outcome {
    let unit = |c: CodeSpec| -> Result<f64, String> {
        let (c, _) = normalize_energy(&c, 1.0).map_err(|e| e.to_string())?;
        resolution(&c).map_err(|e| e.to_string())
    };
    let exact = [
        ("cat m=2", unit(catalog::cat(2, 2).unwrap())?, 2.0),
        ("16-leg cat", unit(catalog::cat(8, 2).unwrap())?, 4.0 * (PI / 16.0).sin().powi(2)),
        ("24-cell", unit(catalog::cube_orthoplex(4, 2).unwrap())?, 2.0 - 2f64.sqrt()),
    ];
    let approx = [
        ("12-gon", unit(catalog::cat(12, 2).unwrap())?, 0.07),
        ("hexagon", unit(catalog::polygon_shells(6, &[1.0, 2.0], 2).unwrap())?, 0.26),
        ("square3", unit(catalog::polygon_shells(4, &[1.0, 2.0, 3.0], 2).unwrap())?, 0.44),
        ("twoshell_24cell", unit(catalog::twoshell_24cell(2.0).unwrap())?, 0.56),
    ];
    let mut out = Vec::new();
    for (name, got, want) in exact {
        check((got - want).abs() <= 1e-9, format!("{name}: {got} vs {want}"))?;
        out.push(format!("{name}={got:.6}"));
    }
    for (name, got, want) in approx {
        check((got - want).abs() <= 0.01, format!("{name}: {got} vs ≈{want}"))?;
        out.push(format!("{name}={got:.4}"));
    }
    Ok(out.join(" "))
}

fn criterion_3() -> Outcome {
    let mut rows = Vec::new();
    for d in 2..=8usize {
        rows.push(("antipodal", d, 1, 2u128));
        rows.push(("simplex", d, 2, d as u128 + 1));
        rows.push(("cross-polytope", d, 3, 2 * d as u128));
    }
    rows.push(("icosahedron", 3, 5, 12));
    for (name, d, t, n) in &rows {
        let b = size_bounds(Domain::Sphere(*d), *t, true, *n).map_err(|e| e.to_string())?;
        check(b.lower_bound() == *n && b.tight, format!("{name} D={d}: bound {} vs {n}", b.lower_bound()))?;
    }
    let mut count = 0;
    for code in all_catalog_codes() {
        for b in code_bounds(&code, MOMENT_TOL).map_err(|e| e.to_string())? {
            check(b.tchakaloff_max >= b.actual, format!("{}: Tchakaloff {} < {}", code.name(), b.tchakaloff_max, b.actual))?;
            count += 1;
        }
    }
    Ok(format!("{} saturated rows, {count} catalog constellations under Tchakaloff", rows.len()))
}

fn criterion_4() -> Outcome {
    let codes = all_catalog_codes();
    for code in &codes {
        let p = code_parameters(code, DEFAULT_CEILING, MOMENT_TOL).map_err(|e| e.to_string())?;
        let t = moment_match_degree(code, DEFAULT_CEILING, MOMENT_TOL).map_err(|e| e.to_string())?;
        check(p.t_down >= t / 2, format!("{}: t↓={} < ⌊{t}/2⌋", code.name(), p.t_down))?;
        check(p.d_updown >= t + 1, format!("{}: d↕={} < {t}+1", code.name(), p.d_updown))?;
        check(p.d_updown - 1 == t, format!("{}: d↕−1={} ≠ {t}", code.name(), p.d_updown - 1))?;
    }
    Ok(format!("{} catalog codes", codes.len()))
}

fn random_point(rng: &mut ChaCha8Rng, modes: usize, r: f64) -> AmplitudePoint {
    AmplitudePoint::new((0..modes).map(|_| Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect()).unwrap()
}

fn fock_inv_sqrt(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (g + g.adjoint()).scale(0.5);
    let e = h.symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| Complex64::new(1.0 / x.sqrt(), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cases, mut worst) = (0usize, 0.0f64);
    let spaces = [FockSpace::new(1, 48).unwrap(), FockSpace::new(2, 32).unwrap()];
    while cases < 80 {
        let space = spaces[cases % 2];
        let (a, b) = (random_point(&mut rng, space.modes(), 2.0), random_point(&mut rng, space.modes(), 2.0));
        if coherent_tail(&a, &space) >= 1e-12 || coherent_tail(&b, &space) >= 1e-12 {
            continue;
        }
        let (va, vb) = (coherent_fock(&a, &space).unwrap().vector, coherent_fock(&b, &space).unwrap().vector);
        let err = if cases % 4 < 2 {
            (coherent_overlap(&a, &b).unwrap() - va.dotc(&vb)).norm()
        } else {
            let n = space.modes();
            let p = MultiIndex::new((0..n).map(|_| rng.gen_range(0..=2)).collect());
            let q = MultiIndex::new((0..n).map(|_| rng.gen_range(0..=2)).collect());
            let fock = apply_annihilation(&space, &p, &va).dotc(&apply_annihilation(&space, &q, &vb));
            (ladder_matrix_element(&a, &b, &p, &q).unwrap() - fock).norm()
        };
        worst = worst.max(err);
        check(err <= 1e-8, format!("case {cases}: deviation {err:e}"))?;
        cases += 1;
    }
    let codes = [
        (catalog::cat(2, 2).unwrap(), 48),
        (catalog::cat(3, 3).unwrap(), 48),
        (catalog::polygon_shells(4, &[1.0, 2.0], 2).unwrap(), 48),
        (catalog::cell16_qutrit().unwrap(), 24),
    ];
    let mut kl_cases = 0;
    while kl_cases < 24 {
        let (code, cutoff) = &codes[kl_cases % codes.len()];
        let space = FockSpace::new(code.modes(), *cutoff).unwrap();
        let scale = rng.gen_range(0.8..1.6);
        let (raw, tail) = codeword_vectors(code, scale, &space).map_err(|e| e.to_string())?;
        if tail >= 1e-12 {
            continue;
        }
        let report = kl_report(code, 2, scale).map_err(|e| e.to_string())?;
        let s = fock_inv_sqrt(&(raw.adjoint() * &raw));
        let images: Vec<_> = report
            .errors
            .iter()
            .map(|mu| {
                let mut m = raw.clone();
                for c in 0..m.ncols() {
                    m.set_column(c, &apply_annihilation(&space, mu, &raw.column(c).into_owned()));
                }
                m
            })
            .collect();
        for (&(mu, nu), block) in &report.matrices {
            let fock = &s * (images[mu].adjoint() * &images[nu]) * &s;
            let err = (block - fock).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            worst = worst.max(err);
            check(err <= 1e-8, format!("{} scale {scale}: block ({mu},{nu}) deviation {err:e}", code.name()))?;
        }
        kl_cases += 1;
    }
    Ok(format!("{} randomized cases, max deviation {worst:.2e}", cases + kl_cases))
}

const BENCH_CUTOFF: usize = 40;
const GAMMA_REF: f64 = 0.1;

struct PairResult {
    label: &'static str,
    scales: (f64, f64),
    ratios: Vec<(f64, f64)>,
}

fn bench_pair(
    label: &'static str,
    qsc: &CodeSpec,
    qcc: &CodeSpec,
    space: &FockSpace,
    grid: &[f64],
    gammas: &[f64],
) -> Result<PairResult, String> {
    let e = |x: Error| x.to_string();
    let a = optimal_scale(qsc, GAMMA_REF, space, grid).map_err(e)?;
    let b = optimal_scale(qcc, GAMMA_REF, space, grid).map_err(e)?;
    let mut ratios = Vec::new();
    for &g in gammas {
        let fs = evaluate_point(qsc, g, a.scale, space).map_err(e)?.fidelity;
        let fc = evaluate_point(qcc, g, b.scale, space).map_err(e)?.fidelity;
        ratios.push((g, (1.0 - fs) / (1.0 - fc)));
    }
    Ok(PairResult { label, scales: (a.scale, b.scale), ratios })
}

fn unit_energy(c: CodeSpec) -> CodeSpec {
    normalize_energy(&c, 1.0).unwrap().0
}

fn criterion_6() -> Outcome {
    let pairs = [
        ("8", unit_energy(catalog::cat(8, 2).unwrap()), unit_energy(catalog::polygon_shells(4, &[1.0, 2.0], 2).unwrap())),
        (
            "12",
            unit_energy(catalog::cat(12, 2).unwrap()),
            unit_energy(catalog::polygon_shells(4, &[1.0, 2.0, 3.0], 2).unwrap()),
        ),
    ];
    let gammas = [0.05, 0.1, 0.15, 0.2];
    let space = FockSpace::new(1, BENCH_CUTOFF).unwrap();
    let grid = linear_grid(0.5, 5.0, 46);
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (label, qsc, qcc) in &pairs {
        let r = bench_pair(label, qsc, qcc, &space, &grid, &gammas)?;
        summary.push(format!(
            "pair {}: α_op QSC {:.4} QCC {:.4}, R {}",
            r.label,
            r.scales.0,
            r.scales.1,
            r.ratios.iter().map(|(g, x)| format!("{g}:{x:.3}")).collect::<Vec<_>>().join(",")
        ));
        if !(r.scales.1 < r.scales.0) {
            failures.push(format!("(a) pair {label}: α_op(QCC) ≥ α_op(QSC)"));
        }
        for (g, x) in &r.ratios {
            if !(*x > 1.0) {
                failures.push(format!("(b) pair {label}: R({g}) = {x:.3}"));
            }
        }
        for (code, scale) in [(qsc, r.scales.0), (qcc, r.scales.1)] {
            let sweep: Vec<f64> = (0..=10)
                .map(|i| evaluate_point(code, 0.02 * i as f64, scale, &space).map(|p| p.fidelity))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            if (sweep[0] - 1.0).abs() > 1e-8 {
                failures.push(format!("(c) {}: F(0) = {}", code.name(), sweep[0]));
            }
            if sweep.windows(2).any(|w| w[1] > w[0]) {
                failures.push(format!("(d) {}: F not monotone in γ", code.name()));
            }
        }
    }
    // the same protocol at a cutoff where no optimum is limited by truncation
    let wide = FockSpace::new(1, 96).unwrap();
    for (label, qsc, qcc) in &pairs {
        let r = bench_pair(label, qsc, qcc, &wide, &linear_grid(0.5, 8.0, 76), &gammas)?;
        summary.push(format!(
            "[N_c=96 pair {}: α_op {:.3}/{:.3}, R {}]",
            r.label,
            r.scales.0,
            r.scales.1,
            r.ratios.iter().map(|(g, x)| format!("{g}:{x:.3}")).collect::<Vec<_>>().join(",")
        ));
    }
    let text = summary.join("; ");
    if failures.is_empty() {
        Ok(text)
    } else {
        Err(format!("{}; {text}", failures.join("; ")))
    }
}

fn criterion_7() -> Outcome {
    let e = |x: Error| x.to_string();
    let cat = catalog::cat(2, 2).unwrap();
    let gon = catalog::cat(12, 2).unwrap();
    let s40 = FockSpace::new(1, 40).unwrap();
    let s64 = FockSpace::new(1, 64).unwrap();
    let z_cat = verify_ztype(&cat, &ztype_polynomials(&cat).map_err(e)?, 2.0, &s40).map_err(e)?.max_residual;
    let z_gon = verify_ztype(&gon, &ztype_polynomials(&gon).map_err(e)?, 2.0, &s64).map_err(e)?.max_residual;
    check(z_cat < 1e-8 && z_gon < 1e-8, format!("Z residuals {z_cat:e}, {z_gon:e}"))?;
    let x_cat = verify_xtype(&cat, &Rotation::global_phase(1, PI), 2.0, &s40).map_err(e)?.max_residual;
    let x_gon = verify_xtype(&gon, &Rotation::global_phase(1, 2.0 * PI / 12.0), 2.0, &s64).map_err(e)?.max_residual;
    check(x_cat < 1e-10 && x_gon < 1e-10, format!("X residuals {x_cat:e}, {x_gon:e}"))?;
    // roots {1, −1, i}: misses −i
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let wrong = AnnihilationPolynomial::univariate(1, 0, &[c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)]).map_err(e)?;
    let z_neg = verify_ztype(&cat, &[wrong], 2.0, &s40).map_err(e)?.max_residual;
    check(z_neg > 1e-2, format!("wrong polynomial has residual {z_neg:e}"))?;
    let x_neg = verify_xtype(&gon, &Rotation::global_phase(1, 2.0 * PI / 24.0), 2.0, &s64);
    check(matches!(x_neg, Err(Error::SymmetryMismatch(_))), "2π/24 rotation passed the geometric check")?;
    let hex = catalog::polygon_shells(6, &[1.0, 2.0], 2).unwrap();
    let w = containment_witness(&hex, 1.0, &s64).map_err(e)?;
    check(w.z_residual < 1e-8 && w.x_residual < 1e-10 && w.outside_norm > 1e-3, format!("witness {w:?}"))?;
    Ok(format!(
        "Z {z_cat:.1e}/{z_gon:.1e}, X {x_cat:.1e}/{x_gon:.1e}, negative Z {z_neg:.2}, hexagon witness outside norm {:.3}",
        w.outside_norm
    ))
}

fn weighted_sum(c: &WeightedConstellation, terms: &[(MultiIndex, MultiIndex, Complex64)]) -> Complex64 {
    c.iter()
        .map(|(a, w)| {
            let f: Complex64 = terms
                .iter()
                .map(|(p, q, k)| {
                    k * a
                        .coords()
                        .iter()
                        .zip(p.entries().iter().zip(q.entries()))
                        .map(|(z, (&pj, &qj))| z.conj().powu(pj) * z.powu(qj))
                        .product::<Complex64>()
                })
                .sum();
            f * w
        })
        .sum()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut designs = 0;
    let mut worst = 0.0f64;
    for code in all_catalog_codes() {
        for c in code.logicals() {
            let rmax = c.shell_radii().last().copied().unwrap();
            let unit = c.scaled(1.0 / rmax);
            let t = design_degree(&unit, 12, MOMENT_TOL).map_err(|e| e.to_string())?;
            if t == 0 {
                continue;
            }
            designs += 1;
            let n = c.modes();
            let monomials: Vec<(MultiIndex, MultiIndex)> = indices_up_to(n, t)
                .into_iter()
                .flat_map(|p| indices_up_to(n, t - p.degree()).into_iter().map(move |q| (p.clone(), q)))
                .collect();
            for _ in 0..50 {
                let terms: Vec<_> = monomials
                    .iter()
                    .map(|(p, q)| (p.clone(), q.clone(), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                    .collect();
                let sum = weighted_sum(&unit, &terms);
                let integral: Complex64 = terms
                    .iter()
                    .map(|(p, q, k)| k * shell_integral(&unit, p, q).unwrap())
                    .sum();
                let err = (sum - integral).norm();
                worst = worst.max(err);
                check(err <= 1e-9, format!("{} degree {t}: deviation {err:e}", code.name()))?;
            }
        }
    }
    Ok(format!("{designs} constellations x 50 polynomials, max deviation {worst:.2e}"))
}

fn known_design_sizes() -> Result<(), String> {
    // real point sets in even dimension, embedded pairwise into modes
    let embed = |pts: Vec<Vec<f64>>| {
        let pts = cubacode_core::constellation::embed_real_to_complex(&pts).unwrap();
        WeightedConstellation::uniform(pts).unwrap()
    };
    let tri: Vec<Vec<f64>> = (0..3).map(|j| vec![(2.0 * PI * j as f64 / 3.0).cos(), (2.0 * PI * j as f64 / 3.0).sin()]).collect();
    let cross4: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let mut v = vec![0.0; 4];
            v[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
            v
        })
        .collect();
    for (name, c, t) in [
        ("antipodal", embed(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]), 1),
        ("triangle", embed(tri), 2),
        ("16-cell", embed(cross4), 3),
    ] {
        check(is_spherical_design(&c, t, MOMENT_TOL).map_err(|e| e.to_string())?, format!("{name} is not a {t}-design"))?;
    }
    // icosahedron in R³ through the real monomial integrals
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut ico = Vec::new();
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            for v in [[0.0, s1, s2 * g], [s1, s2 * g, 0.0], [s2 * g, 0.0, s1]] {
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                ico.push([v[0] / n, v[1] / n, v[2] / n]);
            }
        }
    }
    for deg in 0..=5u32 {
        for u0 in 0..=deg {
            for u1 in 0..=(deg - u0) {
                let u = [u0, u1, deg - u0 - u1];
                let avg: f64 = ico.iter().map(|x| (0..3).map(|j| x[j].powi(u[j] as i32)).product::<f64>()).sum::<f64>() / 12.0;
                check((avg - sphere_monomial_integral(3, &u)).abs() < 1e-12, format!("icosahedron fails at {u:?}"))?;
            }
        }
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("code parameters", criterion_1),
        ("resolution at unit energy", criterion_2),
        ("bound saturation", || {
            known_design_sizes()?;
            criterion_3()
        }),
        ("triple consistency", criterion_4),
        ("oracle equivalence", criterion_5),
        ("benchmark structure", criterion_6),
        ("stabilizer suite", criterion_7),
        ("complex cubature exactness", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2} s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2} s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
