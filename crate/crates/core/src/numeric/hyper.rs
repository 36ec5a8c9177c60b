//! Numerical evaluation of the hypergeometric family: the Euler-integral
//! quadrature path and the 2F1 series path (with a Pfaff transformation for
//! large negative arguments), plus the Appell-type two-variable kernel via
//! simplex quadrature.

use super::gammafn::gamma;
use super::quad::{integrate, QuadratureConfig};
use crate::error::{EngineError, EngineResult};

/// Raw Gauss series 2F1(alpha, beta; c; z); converges for |z| < 1.
fn gauss_series(alpha: f64, beta: f64, c: f64, z: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    let mut term = 1.0;
    let mut acc = 1.0;
    for n in 0..100_000 {
        let nf = n as f64;
        term *= (alpha + nf) * (beta + nf) / ((c + nf) * (nf + 1.0)) * z;
        acc += term;
        if term.abs() < 0.5 * (cfg.abs_tol * 1e-3 + cfg.rel_tol * 1e-3 * acc.abs()) {
            return Ok(acc);
        }
    }
    Err(EngineError::NonConvergence(format!(
        "2F1 series at z = {}",
        z
    )))
}

/// 2F1(alpha, beta; c; z) for z < 1, applying the Pfaff transformation
/// 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)) when z is far from 0.
fn hyp2f1(alpha: f64, beta: f64, c: f64, z: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    if z >= 1.0 {
        return Err(EngineError::BranchPoint);
    }
    if z.abs() <= cfg.series_cutoff {
        return gauss_series(alpha, beta, c, z, cfg);
    }
    if z < 0.0 {
        let w = z / (z - 1.0); // in (0, 1)
        let v = gauss_series(alpha, c - beta, c, w, cfg)?;
        return Ok((1.0 - z).powf(-alpha) * v);
    }
    // z in (cutoff, 1): the raw series still converges, just more slowly.
    gauss_series(alpha, beta, c, z, cfg)
}

/// H_{a,b}(z; m) by the 2F1 series representation
/// Gamma(d)/Gamma(a+b) 2F1(d, b; a+b; z), d = a+b+m/2-2.
pub fn eval_h1_series(a: u32, b: u32, z: f64, m: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    if z >= 1.0 {
        return Err(EngineError::BranchPoint);
    }
    if a == 0 {
        return eval_h1_closed_a0(b, z, m);
    }
    let d = (a + b) as f64 + m / 2.0 - 2.0;
    let pre = gamma(d) / gamma((a + b) as f64);
    Ok(pre * hyp2f1(d, b as f64, (a + b) as f64, z, cfg)?)
}

fn eval_h1_closed_a0(b: u32, z: f64, m: f64) -> EngineResult<f64> {
    match b {
        1 => {
            if (m - 2.0).abs() < 1e-12 {
                Ok(-(1.0 - z).ln())
            } else {
                Ok(gamma(m / 2.0 - 1.0) * (1.0 - z).powf(-m / 2.0 + 1.0))
            }
        }
        2 => Ok(gamma(m / 2.0) * (1.0 - z).powf(-m / 2.0)),
        _ => Err(EngineError::NonReducibleAtom(format!("H[0,{}]", b))),
    }
}

/// H_{a,b}(z; m) by adaptive quadrature of the Euler integral
/// Gamma(d)/(Gamma(a)Gamma(b)) int_0^1 (1-t)^{a-1} t^{b-1} (1-zt)^{-d} dt.
pub fn eval_h1_quadrature(a: u32, b: u32, z: f64, m: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    if z >= 1.0 {
        return Err(EngineError::BranchPoint);
    }
    if a == 0 {
        return eval_h1_closed_a0(b, z, m);
    }
    let d = (a + b) as f64 + m / 2.0 - 2.0;
    let pre = gamma(d) / (gamma(a as f64) * gamma(b as f64));
    let am1 = (a - 1) as i32;
    let bm1 = (b - 1) as i32;
    let f = move |t: f64| (1.0 - t).powi(am1) * t.powi(bm1) * (1.0 - z * t).powf(-d);
    Ok(pre * integrate(&f, 0.0, 1.0, cfg)?)
}

/// H_{a,b}(z; m): series path primary, quadrature fallback.
pub fn eval_h1(a: u32, b: u32, z: f64, m: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    match eval_h1_series(a, b, z, m, cfg) {
        Ok(v) => Ok(v),
        Err(EngineError::BranchPoint) => Err(EngineError::BranchPoint),
        Err(_) => eval_h1_quadrature(a, b, z, m, cfg),
    }
}

/// H_{a,b,c}(z1, z2; m) by simplex double quadrature of the Euler integral.
pub fn eval_h2(a: u32, b: u32, c: u32, z1: f64, z2: f64, m: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    if z1 >= 1.0 || z2 >= 1.0 {
        return Err(EngineError::BranchPoint);
    }
    if a == 0 || b == 0 || c == 0 {
        return Err(EngineError::NonReducibleAtom(format!("H[{},{},{}]", a, b, c)));
    }
    let d = (a + b + c) as f64 + m / 2.0 - 2.0;
    let pre = gamma(d) / (gamma(a as f64) * gamma(b as f64) * gamma(c as f64));
    let am1 = (a - 1) as i32;
    let bm1 = (b - 1) as i32;
    let cm1 = (c - 1) as i32;
    // substitute u = (1-t) v: the simplex becomes the unit square and
    // (1-t-u)^{a-1} u^{c-1} du = (1-t)^{a+c-1} (1-v)^{a-1} v^{c-1} dv
    let inner_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol * 0.1,
        rel_tol: cfg.rel_tol * 0.1,
        ..*cfg
    };
    let outer = move |t: f64| {
        let inner = move |v: f64| {
            (1.0 - v).powi(am1) * v.powi(cm1) * (1.0 - z1 * t - z2 * (1.0 - t) * v).powf(-d)
        };
        let iv = integrate(&inner, 0.0, 1.0, &inner_cfg).unwrap_or(f64::NAN);
        t.powi(bm1) * (1.0 - t).powi(am1 + cm1 + 1) * iv
    };
    let val = pre * integrate(&outer, 0.0, 1.0, cfg)?;
    if val.is_nan() {
        return Err(EngineError::NonConvergence("inner simplex quadrature".into()));
    }
    Ok(val)
}

/// Cross-check route for H_{a,1,1}: the divided-difference representation
/// (z H_{a+1,1})[z1, z2] with confluent fallback when z1 and z2 collide.
pub fn eval_h2_divdiff(a: u32, z1: f64, z2: f64, m: f64, cfg: &QuadratureConfig) -> EngineResult<f64> {
    let g = |z: f64| -> EngineResult<f64> { Ok(z * eval_h1(a + 1, 1, z, m, cfg)?) };
    if (z1 - z2).abs() > 1e-6 {
        Ok((g(z1)? - g(z2)?) / (z1 - z2))
    } else {
        let x = 0.5 * (z1 + z2);
        let h = 1e-3;
        Ok((g(x - 2.0 * h)? - 8.0 * g(x - h)? + 8.0 * g(x + h)? - g(x + 2.0 * h)?) / (12.0 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h1_reference_values() {
        let cfg = QuadratureConfig::default();
        // H_{1,1}(0; 3) = Gamma(3/2)
        let v = eval_h1(1, 1, 0.0, 3.0, &cfg).unwrap();
        assert!((v - 0.886_226_925_452_758).abs() < 1e-12, "{v}");
        // H_{1,1}(0.5; 2) = 2 ln 2
        let v = eval_h1(1, 1, 0.5, 2.0, &cfg).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-12, "{v}");
        // H_{1,1}(0.5; 4) = 2
        let v = eval_h1(1, 1, 0.5, 4.0, &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn h1_paths_agree() {
        let cfg = QuadratureConfig::default();
        for &(a, b) in &[(1u32, 1u32), (2, 1), (3, 2), (1, 3), (4, 1)] {
            for &z in &[-3.0, -0.4, 0.2, 0.45, 0.7] {
                for &m in &[2.0, 3.0, 4.4, 7.0] {
                    let s = eval_h1_series(a, b, z, m, &cfg).unwrap();
                    let q = eval_h1_quadrature(a, b, z, m, &cfg).unwrap();
                    assert!(
                        (s - q).abs() <= 1e-9 * s.abs().max(1.0),
                        "H[{a},{b}]({z};{m}): series {s} vs quad {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn h2_symmetry_and_contraction() {
        let cfg = QuadratureConfig::default();
        let v1 = eval_h2(1, 2, 1, 0.3, 0.5, 3.0, &cfg).unwrap();
        let v2 = eval_h2(1, 1, 2, 0.5, 0.3, 3.0, &cfg).unwrap();
        assert!((v1 - v2).abs() < 1e-9, "{v1} vs {v2}");
        // H_{a,b,c}(z, 0) = H_{a+c,b}(z)
        let v = eval_h2(2, 1, 1, 0.4, 0.0, 3.5, &cfg).unwrap();
        let w = eval_h1(3, 1, 0.4, 3.5, &cfg).unwrap();
        assert!((v - w).abs() < 1e-9, "{v} vs {w}");
    }

    #[test]
    fn h2_divdiff_route_agrees() {
        let cfg = QuadratureConfig::default();
        let v = eval_h2(1, 1, 1, 0.2, 0.2, 4.0, &cfg).unwrap();
        let w = eval_h2_divdiff(1, 0.2, 0.2, 4.0, &cfg).unwrap();
        assert!((v - w).abs() < 1e-9, "{v} vs {w}");
        let v = eval_h2(2, 1, 1, 0.3, -0.4, 5.0, &cfg).unwrap();
        let w = eval_h2_divdiff(2, 0.3, -0.4, 5.0, &cfg).unwrap();
        assert!((v - w).abs() < 1e-9, "{v} vs {w}");
    }
}
