//! Fixed-step classical Runge-Kutta on small fixed-size systems.

/// One RK4 step of `dz/dt = f(t, z)` from `(t, z)` with step `dt`.
pub fn rk4_step<const D: usize, F>(f: &mut F, t: f64, z: &[f64; D], dt: f64) -> [f64; D]
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    let k1 = f(t, z);
    let k2 = f(t + 0.5 * dt, &axpy(z, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(z, 0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(z, dt, &k3));
    let mut out = *z;
    for i in 0..D {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const D: usize>(z: &[f64; D], a: f64, k: &[f64; D]) -> [f64; D] {
    let mut out = *z;
    for i in 0..D {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let mut f = |_t: f64, z: &[f64; 1]| [-z[0]];
        let mut err = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let mut z = [1.0];
            for i in 0..n {
                z = rk4_step(&mut f, i as f64 * dt, &z, dt);
            }
            (z[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        // dz/dt = cos t, z(0) = 0 -> sin t
        let mut f = |t: f64, _z: &[f64; 1]| [t.cos()];
        let mut z = [0.0];
        let dt = 0.01;
        for i in 0..100 {
            z = rk4_step(&mut f, i as f64 * dt, &z, dt);
        }
        assert!((z[0] - 1.0f64.sin()).abs() < 1e-10);
    }
}
