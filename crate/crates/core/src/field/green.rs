//! Free Schrödinger propagator (ħ = 1).
//!
//! The 3/2 power is taken on the principal branch. Because `−i m/(2π dt)`
//! lies on the imaginary axis, this equals the cube of the principal square
//! root, so the 3-D kernel is exactly the product of three 1-D kernels.

use crate::{Error, Result, C64};

fn prefactor_base(dt: f64, m: f64) -> C64 {
    C64::new(0.0, -2.0 * m) / (4.0 * std::f64::consts::PI * dt)
}

fn check(dt: f64, m: f64) -> Result<()> {
    if dt == 0.0 {
        return Err(Error::Singular("the propagator at zero elapsed time is a delta function".into()));
    }
    if !(m > 0.0 && m.is_finite() && dt.is_finite()) {
        return Err(Error::Domain(format!("propagator needs finite dt and positive mass, got dt={dt}, m={m}")));
    }
    Ok(())
}

/// G(dx, dt) = (−2mi/(4π dt))^{3/2} exp(i m |dx|²/(2 dt)).
pub fn greens_function(dx: [f64; 3], dt: f64, m: f64) -> Result<C64> {
    check(dt, m)?;
    let r2: f64 = dx.iter().map(|x| x * x).sum();
    let phase = C64::new(0.0, m * r2 / (2.0 * dt)).exp();
    Ok(prefactor_base(dt, m).powf(1.5) * phase)
}

/// One-dimensional kernel (−2mi/(4π dt))^{1/2} exp(i m dx²/(2 dt)).
pub fn greens_function_1d(dx: f64, dt: f64, m: f64) -> Result<C64> {
    check(dt, m)?;
    Ok(prefactor_base(dt, m).sqrt() * C64::new(0.0, m * dx * dx / (2.0 * dt)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_value_principal_branch() {
        let g = greens_function([0.0; 3], 1.0, 1.0).unwrap();
        // (−i/(2π))^{3/2} = (2π)^{−3/2} e^{−3iπ/4}
        let expect = C64::from_polar((2.0 * PI).powf(-1.5), -0.75 * PI);
        assert!((g - expect).norm() < 1e-15);
    }

    #[test]
    fn symmetry_and_time_reversal() {
        let dx = [0.3, -1.2, 0.7];
        let neg = dx.map(|v| -v);
        for dt in [0.1, 1.0, 3.7] {
            let g = greens_function(dx, dt, 2.0).unwrap();
            assert!((g - greens_function(neg, dt, 2.0).unwrap()).norm() < 1e-15);
            assert!((greens_function(dx, -dt, 2.0).unwrap() - g.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn three_d_is_product_of_one_d() {
        let dx = [0.5, 0.2, -0.9];
        for dt in [-2.0, -0.3, 0.3, 2.0] {
            let g = greens_function(dx, dt, 1.5).unwrap();
            let p: C64 = dx.iter().map(|&x| greens_function_1d(x, dt, 1.5).unwrap()).product();
            assert!((g - p).norm() < 1e-14 * g.norm());
        }
    }

    #[test]
    fn zero_time_is_singular() {
        assert!(matches!(greens_function([0.0; 3], 0.0, 1.0), Err(Error::Singular(_))));
        assert!(matches!(greens_function_1d(0.0, 0.0, 1.0), Err(Error::Singular(_))));
    }
}
