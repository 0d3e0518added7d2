//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use isomeasure::measure::DiscreteMeasure;
use isomeasure::polytope::{body_of, lemma2_check_with, polar_of, volume};
use isomeasure::transport::{
    ball_barthe_check, chain_verify_thm1, phi1, phi1_identity_residual, phi2, phi2_identity_residual, Rearrangement,
    TransportMap,
};
use isomeasure::{
    cross_polytope_measure, random_isotropic_measure, regular_simplex_measure, theorem1_bound, theorem2_bound,
    verify_theorem1, verify_theorem2,
};
use nalgebra::DVector;
use rand::Rng;

use common::*;

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check { ok: true, detail: String::new() }
    }

    fn require(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond && self.ok {
            self.detail = what();
        }
        self.ok &= cond;
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn simplex_polar_volume() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        let z = regular_simplex_measure(n).unwrap();
        let v = volume(&polar_of(&z).unwrap()).unwrap();
        let b = theorem1_bound(n).unwrap();
        worst = worst.max(rel(v, b));
        c.require(rel(v, b) <= 1e-9, || format!("n={n}: volume {v} vs bound {b}"));
    }
    let b2 = theorem1_bound(2).unwrap();
    let b3 = theorem1_bound(3).unwrap();
    c.require((b2 - 5.1961524).abs() < 5e-8 && (b3 - 13.8564065).abs() < 5e-8, || format!("bounds {b2}, {b3}"));
    if c.ok {
        c.detail = format!("max rel err {worst:.1e}; n=2 {b2:.7}, n=3 {b3:.7}");
    }
    c
}

/// Volume of a regular `n`-simplex with edge `a`: `a^n/n! · √((n+1)/2^n)`.
fn regular_simplex_volume_oracle(n: usize, edge: f64) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    edge.powi(n as i32) / fact * ((n as f64 + 1.0) / 2f64.powi(n as i32)).sqrt()
}

fn simplex_body_volume() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        let z = regular_simplex_measure(n).unwrap();
        let v = volume(&body_of(&z).unwrap()).unwrap();
        let b = theorem2_bound(n).unwrap();
        // Inscribed in the unit sphere the edge is √(2(n+1)/n).
        let oracle = regular_simplex_volume_oracle(n, (2.0 * (n as f64 + 1.0) / n as f64).sqrt());
        worst = worst.max(rel(v, b)).max(rel(v, oracle));
        c.require(rel(v, b) <= 1e-9 && rel(v, oracle) <= 1e-9, || {
            format!("n={n}: volume {v}, bound {b}, oracle {oracle}")
        });
    }
    let b2 = theorem2_bound(2).unwrap();
    let b3 = theorem2_bound(3).unwrap();
    let b3_formula = 16.0 / (3f64.powf(1.5) * 6.0);
    c.require((b2 - 1.2990381).abs() < 5e-8 && rel(b3, b3_formula) <= 1e-12, || format!("bounds {b2}, {b3}"));
    if c.ok {
        c.detail = format!("max rel err {worst:.1e}; n=2 {b2:.7}, n=3 {b3:.7} (= 16/(3^1.5*6))");
    }
    c
}

fn cross_strict() -> Check {
    let mut c = Check::new();
    for n in 2..=5 {
        let z = cross_polytope_measure(n, None).unwrap();
        let t1 = verify_theorem1(&z).unwrap();
        let t2 = verify_theorem2(&z).unwrap();
        let cube = 2f64.powi(n as i32);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        c.require((t1.volume - cube).abs() <= 1e-10, || format!("n={n}: polar volume {}", t1.volume));
        c.require((t2.volume - cube / fact).abs() <= 1e-10, || format!("n={n}: body volume {}", t2.volume));
        c.require(t1.gap > 0.0 && t2.gap > 0.0 && !t1.equality && !t2.equality, || {
            format!("n={n}: gaps {} {}", t1.gap, t2.gap)
        });
    }
    if c.ok {
        c.detail = "n=2..5 volumes exact, both gaps positive".into();
    }
    c
}

fn random_universal() -> Check {
    let mut c = Check::new();
    let mut count = 0;
    let mut worst_residual: f64 = 0.0;
    let mut min_gap = (f64::INFINITY, f64::INFINITY);
    for n in 2..=4usize {
        for k in 0..100u64 {
            let m = n + 2 + (k as usize % (11 - n));
            let seed = 1000 * n as u64 + k;
            let z = match random_isotropic_measure(n, m, seed) {
                Ok(z) => z,
                Err(e) => {
                    c.require(false, || format!("n={n} m={m} seed={seed}: {e}"));
                    continue;
                }
            };
            let residual = z.moment_report().isotropy_residual;
            worst_residual = worst_residual.max(residual);
            c.require(z.len() <= 12 && residual <= 1e-7, || format!("seed={seed}: residual {residual:e}"));
            match (verify_theorem1(&z), verify_theorem2(&z)) {
                (Ok(a), Ok(b)) => {
                    min_gap.0 = min_gap.0.min(a.gap / a.bound);
                    min_gap.1 = min_gap.1.min(b.gap / b.bound);
                    c.require(a.holds && b.holds, || format!("seed={seed}: gaps {} {}", a.gap, b.gap));
                }
                (a, b) => c.require(false, || format!("seed={seed}: {:?} {:?}", a.err(), b.err())),
            }
            count += 1;
        }
    }
    if c.ok {
        c.detail = format!(
            "{count} measures; max residual {worst_residual:.1e}; min rel gaps {:.3e} / {:.3e}",
            min_gap.0, min_gap.1
        );
    }
    c
}

fn rearrangement_identities() -> Check {
    let mut c = Check::new();
    let (mut r1, mut r2, mut defining) = (0f64, 0f64, 0f64);
    for k in 0..1000 {
        let t = 0.01 + (10.0 - 0.01) * k as f64 / 999.0;
        r1 = r1.max(phi1_identity_residual(t).unwrap());
        let s = -3.0 + 6.0 * k as f64 / 999.0;
        r2 = r2.max(phi2_identity_residual(s));
        // Defining relations against an independent quadrature of e^{−s²}.
        let p = phi1(t).unwrap();
        defining = defining.max((gaussian_cdf_oracle(p) - (1.0 - (-t).exp())).abs());
        defining = defining.max(((-phi2(s)).exp() - (1.0 - gaussian_cdf_oracle(s))).abs());
    }
    let mut c2 = Check::new();
    c2.require(r1 <= 1e-10, || format!("phi1 identity residual {r1:e}"));
    c2.require(r2 <= 1e-10, || format!("phi2 identity residual {r2:e}"));
    c2.require(defining <= 1e-10, || format!("defining relation off by {defining:e}"));
    c.ok = c2.ok;
    c.detail =
        if c.ok { format!("residuals {r1:.1e} / {r2:.1e}; quadrature oracle {defining:.1e}") } else { c2.detail };
    c
}

fn ball_barthe_suite() -> Check {
    let mut c = Check::new();
    let mut pool: Vec<DiscreteMeasure> = Vec::new();
    for n in 2..=4 {
        pool.extend(families(n, 40 + n as u64).into_iter().map(|(_, z)| z));
    }
    let mut r = rng(6);
    let mut probes = 0;
    let mut strict = 0;
    for k in 0..10_000 {
        let z = &pool[k % pool.len()];
        let mut values: Vec<f64> = (0..z.len()).map(|_| (6.0 * r.random::<f64>() - 3.0).exp()).collect();
        if k % 10 == 0 {
            let v = values[0];
            values.iter_mut().for_each(|t| *t = v);
        }
        let out = ball_barthe_check(z, &values).unwrap();
        c.require(out.holds, || format!("probe {k}: lhs {} < rhs {}", out.lhs, out.rhs));
        c.require(out.equality_observed == out.equality_expected, || format!("probe {k}: {out:?}"));
        strict += (!out.equality_observed) as usize;
        probes += 1;
    }
    for n in 2..=5 {
        for k in 0..50 {
            let basis = orthonormal_basis_measure(n, 100 * n as u64 + k);
            let values: Vec<f64> = (0..n).map(|_| (4.0 * r.random::<f64>() - 2.0).exp()).collect();
            let out = ball_barthe_check(&basis, &values).unwrap();
            c.require(out.equality_expected && out.equality_observed, || format!("orthonormal n={n}: {out:?}"));
            let z = regular_simplex_measure(n).unwrap();
            let mut values: Vec<f64> = (0..=n).map(|_| (2.0 * r.random::<f64>() - 1.0).exp()).collect();
            values[0] *= 1.5;
            let out = ball_barthe_check(&z, &values).unwrap();
            c.require(out.holds && !out.equality_expected && !out.equality_observed && out.lhs > out.rhs, || {
                format!("simplex n={n}: {out:?}")
            });
            probes += 2;
        }
    }
    if c.ok {
        c.detail = format!("{probes} probes, {strict} strict among random; equality families consistent");
    }
    c
}

fn transport_positivity() -> Check {
    let mut c = Check::new();
    let (mut min_eig, mut worst_height, mut in_cone) = (f64::INFINITY, 0f64, 0usize);
    for n in 2..=4 {
        for (name, z) in families(n, 70 + n as u64) {
            let lifted = z.lift().unwrap();
            let t1 = TransportMap::new(Rearrangement::ExponentialToGaussian, &lifted).unwrap();
            let t2 = TransportMap::new(Rearrangement::GaussianToExponential, &lifted).unwrap();
            for y in cone_points(&z, 1000, 0.0, 7 + n as u64) {
                let p = t1.probe(&y).unwrap();
                min_eig = min_eig.min(p.min_eigenvalue);
                c.require(p.positive_definite() && p.symmetry_error <= 1e-12, || format!("{name}: T1 at {y:?}"));
            }
            for (k, y) in gaussian_points(n + 1, 10_000, 9 + n as u64).into_iter().enumerate() {
                if k < 1000 {
                    let p = t2.probe(&y).unwrap();
                    min_eig = min_eig.min(p.min_eigenvalue);
                    let comp = p.components.unwrap();
                    worst_height = worst_height.max((comp.height_from_base - comp.height_from_lift).abs());
                    c.require(p.positive_definite() && comp.passes(&p.ty), || format!("{name}: T2 at {y:?}: {comp:?}"));
                    c.require((comp.height_from_base - comp.height_from_lift).abs() <= 1e-12, || {
                        format!("{name}: heights {} vs {}", comp.height_from_base, comp.height_from_lift)
                    });
                }
                let ty = t2.apply(&y).unwrap();
                let inside = isomeasure::transport::in_cone_thm2_with(&ty, t2.body().unwrap());
                in_cone += inside as usize;
                c.require(inside, || format!("{name}: T2 image of {y:?} outside the cone"));
            }
        }
    }
    if c.ok {
        c.detail =
            format!("min eigenvalue {min_eig:.3e}; {in_cone} images in cone; height agreement {worst_height:.1e}");
    }
    c
}

fn finite_difference_jacobian(map: &TransportMap, y: &DVector<f64>) -> nalgebra::DMatrix<f64> {
    let d = y.len();
    let h = 1e-6;
    let mut fd = nalgebra::DMatrix::zeros(d, d);
    for j in 0..d {
        let mut plus = y.clone();
        let mut minus = y.clone();
        plus[j] += h;
        minus[j] -= h;
        let col = (map.apply(&plus).unwrap() - map.apply(&minus).unwrap()) / (2.0 * h);
        fd.set_column(j, &col);
    }
    fd
}

fn jacobian_check() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (k, n) in [2usize, 3, 4, 3].into_iter().enumerate() {
        let z = if k == 3 { random_isotropic_measure(n, 9, 5).unwrap() } else { regular_simplex_measure(n).unwrap() };
        let z = if k == 1 { cross_polytope_measure(n, None).unwrap() } else { z };
        let lifted = z.lift().unwrap();
        let t1 = TransportMap::new(Rearrangement::ExponentialToGaussian, &lifted).unwrap();
        let t2 = TransportMap::new(Rearrangement::GaussianToExponential, &lifted).unwrap();
        for y in cone_points(&z, 25, 0.05, 80 + k as u64) {
            let e = (t1.jacobian(&y).unwrap() - finite_difference_jacobian(&t1, &y)).amax();
            worst = worst.max(e);
            c.require(e <= 1e-5, || format!("T1 n={n} at {y:?}: {e:e}"));
            points += 1;
        }
        for y in gaussian_points(n + 1, 25, 90 + k as u64) {
            let e = (t2.jacobian(&y).unwrap() - finite_difference_jacobian(&t2, &y)).amax();
            worst = worst.max(e);
            c.require(e <= 1e-5, || format!("T2 n={n} at {y:?}: {e:e}"));
            points += 1;
        }
    }
    if c.ok {
        c.detail = format!("{points} points, max componentwise error {worst:.1e}");
    }
    c
}

fn chain_integral() -> Check {
    let mut c = Check::new();
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        for (name, z) in
            [("simplex", regular_simplex_measure(n).unwrap()), ("cross", cross_polytope_measure(n, None).unwrap())]
        {
            let r = chain_verify_thm1(&z, 1_000_000, 2024 + n as u64).unwrap();
            c.require(r.passed, || format!("{name}{n}: {r:?}"));
            if name == "simplex" {
                c.require((r.closed_form - 1.0).abs() <= 1e-9, || format!("{name}{n}: closed form {}", r.closed_form));
            }
            lines.push(format!("{name}{n} {:.2}σ", r.integral.deviation));
        }
    }
    if c.ok {
        c.detail = lines.join(", ");
    }
    c
}

fn lemma_suites() -> Check {
    let mut c = Check::new();
    let mut pool: Vec<DiscreteMeasure> = Vec::new();
    for n in 2..=4 {
        pool.extend(families(n, 110 + n as u64).into_iter().map(|(_, z)| z));
    }
    let mut r = rng(10);
    let mut worst_gap: f64 = 0.0;
    for k in 0..500 {
        let z = &pool[k % pool.len()];
        let values: Vec<f64> = (0..z.len()).map(|_| 4.0 * r.random::<f64>() - 2.0).collect();
        let out = z.lemma1_check(&values).unwrap();
        c.require(out.holds(), || format!("probe {k}: {out:?}"));
        let x0 = DVector::from_fn(z.dim(), |_, _| 2.0 * r.random::<f64>() - 1.0);
        let linear: Vec<f64> = z.directions().map(|u| u.dot(&x0)).collect();
        let eq = z.lemma1_check(&linear).unwrap();
        worst_gap = worst_gap.max(eq.equality_gap.abs());
        c.require(eq.equality_gap.abs() <= 1e-12, || format!("linear probe {k}: gap {:e}", eq.equality_gap));
    }
    let bodies: Vec<_> = pool.iter().map(|z| body_of(z).unwrap()).collect();
    for k in 0..200 {
        let i = k % pool.len();
        let z = &pool[i];
        let raw: Vec<f64> = (0..z.len()).map(|_| 0.05 + r.random::<f64>()).collect();
        let l1 = z.lp_norm(&raw, 1.0).unwrap();
        let values: Vec<f64> = raw.iter().map(|t| t / l1).collect();
        let inside = lemma2_check_with(&values, z, &bodies[i]).unwrap();
        c.require(inside, || format!("lemma-2 probe {k} outside the body"));
    }
    if c.ok {
        c.detail = format!("500 + 200 probes; max linear-family gap {worst_gap:.1e}");
    }
    c
}

fn lift_correctness() -> Check {
    let mut c = Check::new();
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        for (name, z) in families(n, 130 + n as u64) {
            let lifted = z.lift().unwrap();
            let v = lifted.verify();
            worst = worst.max(v.report.isotropy_residual).max(v.mass_error).max(v.first_moment_error);
            c.require(v.passes() && lifted.on_subsphere(1e-12), || format!("{name}: {v:?}"));
            count += 1;
        }
    }
    if c.ok {
        c.detail = format!("{count} measures, worst residual {worst:.1e}");
    }
    c
}

type Criterion = (&'static str, u64, fn() -> Check);

fn main() {
    let criteria: [Criterion; 11] = [
        ("polar volume of the regular simplex equals the upper bound", 1, simplex_polar_volume),
        ("body volume of the regular simplex equals the lower bound", 1, simplex_body_volume),
        ("cross-polytope volumes exact with strict gaps", 1, cross_strict),
        ("both inequalities on 300 random isotropic measures", 60, random_universal),
        ("rearrangement identities on their grids", 1, rearrangement_identities),
        ("Ball-Barthe inequality and equality detection", 10, ball_barthe_suite),
        ("transport positivity, image cone and height agreement", 30, transport_positivity),
        ("analytic differential against central differences", 10, jacobian_check),
        ("cone integral Monte Carlo against closed form", 60, chain_integral),
        ("norm comparison and barycenter lemmas", 10, lemma_suites),
        ("lift isotropy, mass and centroid", 1, lift_correctness),
    ];
    let mut failures = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let check = f();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(*budget);
        let ok = check.ok && in_budget;
        failures += (!ok) as usize;
        let timing = if in_budget {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s OVER {budget}s BUDGET", elapsed.as_secs_f64())
        };
        println!("[{:02}] {} {name} ({timing}): {}", k + 1, if ok { "PASS" } else { "FAIL" }, check.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
