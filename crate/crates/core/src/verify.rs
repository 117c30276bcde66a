//! Built-in verification suites.
//!
//! Each suite returns machine-checkable results; the CLI prints them and
//! the acceptance tests assert on them. Gates come from `tol`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::calculus::{curl_edge_to_face, div_face_to_cell, grad};
use crate::cellops;
use crate::field::{Layout, RealCellField, ScalarField, ScalarLoc, VectorField};
use crate::forward::conductivity::solve_conductivity_with_source;
use crate::forward::maxwell::{solve_maxwell_with_boundary, MaxwellOptions};
use crate::forward::synth::{synthesize_measurements, MeasurementSet, SynthOptions};
use crate::functionals::{eta, eta_symbolic, gamma};
use crate::grid::Grid;
use crate::illum;
use crate::material::{Bump, CoefficientId, MaterialSpec};
use crate::poly::{Poly3, PolyVec3};
use crate::reconstruct::linalg::{cross_product_matrix, right_inverse_3x6, sigma_min_3x6};
use crate::tol;

type C = Complex64;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub gate: String,
}

impl CheckResult {
    fn le(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= bound,
            value,
            gate: format!("<= {bound:.3e}"),
        }
    }

    fn in_range(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            value,
            gate: format!("in [{lo}, {hi}]"),
        }
    }

    fn flag(name: &str, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            gate: "= pass".into(),
        }
    }
}

pub fn suite_names() -> &'static [&'static str] {
    &["calculus", "mms", "identities", "rank"]
}

pub fn run_suite(name: &str) -> crate::Result<Vec<CheckResult>> {
    match name {
        "calculus" => Ok(suite_calculus()),
        "mms" => Ok(suite_mms()),
        "identities" => Ok(suite_identities()),
        "rank" => Ok(suite_rank()),
        "all" => {
            let mut all = Vec::new();
            for s in suite_names() {
                all.extend(run_suite(s)?);
            }
            Ok(all)
        }
        other => Err(crate::Error::InvalidArgument(format!("unknown suite '{other}'"))),
    }
}

/// Mimetic identities on random fields at n = 16.
pub fn suite_calculus() -> Vec<CheckResult> {
    let g = Grid::with_default_margin(16).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(160);

    let mut f = ScalarField::zeros(g, ScalarLoc::Node);
    f.data
        .mapv_inplace(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let cg = curl_edge_to_face(&grad(&f).unwrap()).unwrap();
    // the operators contract with 1/h each; normalize accordingly
    let scale_cg = f.linf() / (g.h() * g.h());

    let mut u = VectorField::zeros(g, Layout::Edge);
    for axis in 0..3 {
        u.component_mut(axis)
            .mapv_inplace(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    let dc = div_face_to_cell(&curl_edge_to_face(&u).unwrap()).unwrap();
    let scale_dc = u.linf() / (g.h() * g.h());

    vec![
        CheckResult::le("curl_grad_zero", cg.linf() / scale_cg, tol::MIMETIC_REL),
        CheckResult::le("div_curl_zero", dc.linf() / scale_dc, tol::MIMETIC_REL),
    ]
}

fn mms_sigma_poly() -> Poly3 {
    Poly3::parse("2 + 0.5*x1*x2*x3 + 0.3*x1^2 - 0.2*x2").unwrap()
}

fn mms_eps_poly() -> Poly3 {
    Poly3::parse("1.5 + 0.4*x2*x3 - 0.25*x1").unwrap()
}

/// Elliptic MMS: w known, f = div(sigma grad w) sampled at nodes.
fn elliptic_mms_error(n: usize) -> f64 {
    let g = Grid::new(n, 2).unwrap();
    let w_exact = Poly3::parse(
        "x1^4 + 0.6*x2^3*x3 + 0.5*x1*x2*x3 - 0.8*x3^4 + 0.3*x2^4",
    )
    .unwrap();
    let sigma_p = mms_sigma_poly();
    let sigma = RealCellField::from_fn(g, |x| sigma_p.eval(x).re);
    // div(sigma grad w) = grad(sigma) . grad(w) + sigma lap(w); the solver
    // works with the SPD operator -div(sigma grad .), so negate
    let grad_s = sigma_p.gradient();
    let grad_w = w_exact.gradient();
    let mut f = sigma_p.mul(&w_exact.laplacian());
    for a in 0..3 {
        f = f.add(&grad_s[a].mul(&grad_w[a]));
    }
    let f_nodes = ScalarField::sample_poly(g, ScalarLoc::Node, &f.scale(C::new(-1.0, 0.0)));
    let sol = solve_conductivity_with_source(g, &sigma, |x| w_exact.eval(x), Some(&f_nodes))
        .expect("elliptic mms solve");
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let want = w_exact.eval(g.node(i, j, k));
                err2 += (sol.w.data[[i, j, k]] - want).norm_sqr();
                ref2 += want.norm_sqr();
            }
        }
    }
    (err2 / ref2).sqrt()
}

/// Curl-curl MMS: polynomial E_exact, J and boundary data manufactured.
fn maxwell_mms_error(n: usize) -> f64 {
    let g = Grid::new(n, 2).unwrap();
    let omega = 1.3;
    let e_exact = PolyVec3([
        Poly3::parse("x2^4 + 0.5*x3^2*x1 - 0.3*x2*x3").unwrap(),
        Poly3::parse("x1^3*x3 - 0.7*x1*x2 + 0.2*x3^4").unwrap(),
        Poly3::parse("0.6*x1^4 - x2^2*x3^2 + 0.4*x1*x2*x3").unwrap(),
    ]);
    let eps_p = mms_eps_poly();
    let sigma_p = mms_sigma_poly();
    let spec_params = {
        let eps = RealCellField::from_fn(g, |x| eps_p.eval(x).re);
        let sigma = RealCellField::from_fn(g, |x| sigma_p.eval(x).re);
        crate::material::MaterialParams::new(
            g,
            RealCellField::constant(g, 1.0),
            eps,
            sigma,
            1.0,
        )
        .unwrap()
    };
    // q = omega eps + i sigma as a complex polynomial
    let q_poly = eps_p.scale(C::new(omega, 0.0)).add(&sigma_p.scale(C::new(0.0, 1.0)));
    // J = curl curl E - omega q E (mu = 1)
    let mut j_poly = e_exact.grad_div().sub(&e_exact.laplacian());
    let wq = q_poly.scale(C::new(omega, 0.0));
    j_poly = j_poly.sub(&e_exact.scale_by(&wq));
    let j = VectorField::sample_poly(g, Layout::Edge, &j_poly);
    let e_bc = VectorField::sample_poly(g, Layout::Edge, &e_exact);

    let opts = MaxwellOptions {
        tol_rel: 1e-11,
        initial: Some(e_bc.clone()),
        ..Default::default()
    };
    let sol = solve_maxwell_with_boundary(g, &spec_params, omega, &e_bc, Some(&j), &opts)
        .expect("curl-curl mms solve");
    let diff = sol.e.sub(&e_bc).unwrap();
    diff.l2() / e_bc.l2()
}

fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Convergence orders for both solvers across n = 8, 16, 32.
pub fn suite_mms() -> Vec<CheckResult> {
    let (e8, e16, e32) = (elliptic_mms_error(8), elliptic_mms_error(16), elliptic_mms_error(32));
    let (m8, m16, m32) = (maxwell_mms_error(8), maxwell_mms_error(16), maxwell_mms_error(32));
    vec![
        CheckResult::in_range(
            "elliptic_order_8_16",
            observed_order(e8, e16),
            tol::MMS_ORDER_LO,
            tol::MMS_ORDER_HI,
        ),
        CheckResult::in_range(
            "elliptic_order_16_32",
            observed_order(e16, e32),
            tol::MMS_ORDER_LO,
            tol::MMS_ORDER_HI,
        ),
        CheckResult::in_range(
            "curlcurl_order_8_16",
            observed_order(m8, m16),
            tol::MMS_ORDER_LO,
            tol::MMS_ORDER_HI,
        ),
        CheckResult::in_range(
            "curlcurl_order_16_32",
            observed_order(m16, m32),
            tol::MMS_ORDER_LO,
            tol::MMS_ORDER_HI,
        ),
    ]
}

/// Relative residual of the transport identity
/// grad(q) . eta(curl H^1, curl H^2) = q gamma(curl H^1, curl H^2)
/// on noiseless solver data.
pub fn transport_identity_residual(n: usize) -> f64 {
    let g = Grid::new(n, 2).unwrap();
    let spec = MaterialSpec {
        bumps: vec![
            (
                CoefficientId::Sigma,
                Bump { center: [0.45, 0.55, 0.5], width: 0.3, amplitude: 0.2 },
            ),
            (
                CoefficientId::Eps,
                Bump { center: [0.6, 0.4, 0.45], width: 0.35, amplitude: 0.15 },
            ),
        ],
        ..Default::default()
    };
    let params = spec.sample(g).unwrap();
    let omega = 1.3;
    let set = MeasurementSet::new(vec![omega], illum::standard_sextuple()).unwrap();
    let ds = synthesize_measurements(&params, &set, &SynthOptions::default()).unwrap();
    let recs = ds.records_at(omega);

    let w1 = cellops::curl(&recs[0].h_cell).unwrap();
    let w2 = cellops::curl(&recs[1].h_cell).unwrap();
    let eta_w = eta(&w1, &w2).unwrap();
    let gamma_w = gamma(&w1, &w2).unwrap();

    let q = params.q_cell(omega);
    let grad_q = cellops::grad_scalar(&q).unwrap();

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, j, k) in g.band_cells(2).unwrap() {
        let gq = grad_q.at_cell(i, j, k);
        let ew = eta_w.at_cell(i, j, k);
        let lhs: C = gq.iter().zip(&ew).map(|(a, b)| a * b).sum();
        let rhs = q.data[[i, j, k]] * gamma_w.data[[i, j, k]];
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm().max(lhs.norm()));
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// eta algebra (symbolic + discrete) and the transport identity decay.
pub fn suite_identities() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4096);

    // symbolic scaling identity eta(qu, qv) = q^2 eta(u, v)
    let rand_poly = |rng: &mut rand_chacha::ChaCha8Rng, deg: u32| {
        let mut p = Poly3::zero();
        for e0 in 0..=deg {
            for e1 in 0..=deg {
                for e2 in 0..=deg {
                    if rng.gen_bool(0.4) {
                        p.add_term(
                            [e0, e1, e2],
                            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        );
                    }
                }
            }
        }
        p
    };
    let u = PolyVec3([
        rand_poly(&mut rng, 2),
        rand_poly(&mut rng, 2),
        rand_poly(&mut rng, 2),
    ]);
    let v = PolyVec3([
        rand_poly(&mut rng, 2),
        rand_poly(&mut rng, 2),
        rand_poly(&mut rng, 2),
    ]);
    let q = rand_poly(&mut rng, 2);
    let lhs = eta_symbolic(&u.scale_by(&q), &v.scale_by(&q));
    let rhs = eta_symbolic(&u, &v).scale_by(&q.mul(&q));
    let diff = lhs.sub(&rhs);
    let coeff_scale = lhs
        .0
        .iter()
        .flat_map(|p| p.terms().map(|(_, c)| c.norm()))
        .fold(1.0f64, f64::max);
    let worst_coeff = diff
        .0
        .iter()
        .flat_map(|p| p.terms().map(|(_, c)| c.norm()))
        .fold(0.0f64, f64::max);
    out.push(CheckResult::le(
        "eta_scaling_symbolic",
        worst_coeff / coeff_scale,
        1e-12,
    ));

    // discrete eta against the symbolic oracle inside the exactness class
    let g = Grid::with_default_margin(8).unwrap();
    let lin = |rng: &mut rand_chacha::ChaCha8Rng| {
        PolyVec3([rand_poly(rng, 1), rand_poly(rng, 1), rand_poly(rng, 1)])
    };
    let (u1, u2) = (lin(&mut rng), lin(&mut rng));
    let mut q1 = rand_poly(&mut rng, 1);
    q1.add_term([0, 0, 0], C::new(2.0, 0.0));
    let qu = VectorField::sample_poly(g, Layout::Cell, &u1.scale_by(&q1));
    let qv = VectorField::sample_poly(g, Layout::Cell, &u2.scale_by(&q1));
    let lhs_d = eta(&qu, &qv).unwrap();
    let want = eta_symbolic(&u1, &u2).scale_by(&q1.mul(&q1));
    let mut worst = 0.0f64;
    let scale = lhs_d.linf().max(1.0);
    for (i, j, k) in g.band_cells(1).unwrap() {
        let x = g.cell_center(i, j, k);
        let wv = want.eval(x);
        let got = lhs_d.at_cell(i, j, k);
        for a in 0..3 {
            worst = worst.max((wv[a] - got[a]).norm());
        }
    }
    out.push(CheckResult::le("eta_scaling_discrete", worst / scale, tol::ETA_POLY_REL));

    // O(h^2) decay of the transport identity on solver data
    let r12 = transport_identity_residual(12);
    let r24 = transport_identity_residual(24);
    out.push(CheckResult::in_range(
        "transport_identity_order_12_24",
        observed_order(r12, r24),
        tol::MMS_ORDER_LO,
        4.0,
    ));
    out
}

/// Rank contract of the cross-product matrix on random and degenerate
/// direction triples.
pub fn suite_rank() -> Vec<CheckResult> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(321);
    let mut worst_identity = 0.0f64;
    let mut min_sigma3 = f64::INFINITY;
    let mut checked = 0;
    while checked < 200 {
        let mut g = [[C::default(); 3]; 3];
        for gi in g.iter_mut() {
            for v in gi.iter_mut() {
                *v = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let m = cross_product_matrix(&g);
        let smin = sigma_min_3x6(&m);
        let smax = {
            let mmh = m * m.adjoint();
            mmh.symmetric_eigenvalues().iter().fold(0.0f64, |a, b| a.max(*b)).sqrt()
        };
        if smin <= 0.0 || smax / smin > 1e3 {
            continue; // keep condition below 1e3 as specified
        }
        checked += 1;
        min_sigma3 = min_sigma3.min(smin);
        let pinv = right_inverse_3x6(&m, 0.0).unwrap();
        let eye = m * pinv;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { C::new(1.0, 0.0) } else { C::default() };
                worst_identity = worst_identity.max((eye[(i, j)] - want).norm());
            }
        }
    }

    // genuinely degenerate triples must be detected as rank < 3; the
    // eigenvalue route floors at sqrt(machine eps) times sigma_max, so
    // the gate is relative
    let relative_smin = |m: &crate::reconstruct::linalg::Mat3x6| {
        let smin = sigma_min_3x6(m);
        let mmh = m * m.adjoint();
        let smax = mmh.symmetric_eigenvalues().iter().fold(0.0f64, |a, b| a.max(*b)).sqrt();
        smin / smax.max(f64::MIN_POSITIVE)
    };
    let parallel = {
        let g1 = [C::new(0.3, 1.0), C::new(-0.4, 0.2), C::new(0.9, -0.1)];
        let scaled = |s: C| [g1[0] * s, g1[1] * s, g1[2] * s];
        relative_smin(&cross_product_matrix(&[
            g1,
            scaled(C::new(2.0, 0.5)),
            scaled(C::new(-1.0, 1.5)),
        ]))
    };
    let planar = {
        let e1 = [C::new(1.0, 0.0), C::default(), C::default()];
        let e2 = [C::default(), C::new(1.0, 0.0), C::default()];
        let e12 = [C::new(1.0, 0.0), C::new(1.0, 0.0), C::default()];
        relative_smin(&cross_product_matrix(&[e1, e2, e12]))
    };

    vec![
        CheckResult::flag("sigma3_positive_200_random", min_sigma3 > 0.0),
        CheckResult::le("right_inverse_identity_200_random", worst_identity, tol::RIGHT_INV_RANDOM),
        CheckResult::le("parallel_triple_detected", parallel, 1e-7),
        CheckResult::le("planar_triple_detected", planar, 1e-7),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calculus_suite_passes() {
        for c in suite_calculus() {
            assert!(c.passed, "{}: value {:.3e} vs {}", c.name, c.value, c.gate);
        }
    }

    #[test]
    fn rank_suite_passes() {
        for c in suite_rank() {
            assert!(c.passed, "{}: value {:.3e} vs {}", c.name, c.value, c.gate);
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope").is_err());
    }
}
