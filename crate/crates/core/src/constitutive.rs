//! Hindered-settling and compression functions and the phase velocities
//! they induce.
//!
//! The hindered-settling velocity is `v_hs(X) = v0 / (1 + (X/X̆)^η)` and the
//! effective solids stress has slope `σ_e'(X) = α·χ{X ≥ X_c}`, which makes the
//! compression coefficient `d(X)` vanish on the whole interval `[0, X_c]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of intervals of the tabulated primitive `D` on `[X_c, X̂]`.
pub const D_TABLE_INTERVALS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Solids density ρ_X (kg/m³).
    pub rho_x: f64,
    /// Liquid density ρ_L (kg/m³).
    pub rho_l: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    /// Maximal solids concentration X̂ (kg/m³).
    pub x_max: f64,
    /// Maximal settling velocity v0 (m/s).
    pub v0: f64,
    /// Hindered-settling concentration scale X̆ (kg/m³).
    pub x_breve: f64,
    /// Hindered-settling exponent η.
    pub eta: f64,
    /// Slope of the effective solids stress above X_c (m²/s²).
    pub alpha: f64,
    /// Critical concentration X_c (kg/m³).
    pub x_crit: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            rho_x: 1050.0,
            rho_l: 998.0,
            g: 9.81,
            x_max: 30.0,
            v0: 1.76e-3,
            x_breve: 3.87,
            eta: 3.58,
            alpha: 0.2,
            x_crit: 5.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let checks = [
            (p.rho_x > p.x_max, "rho_x must exceed x_max"),
            (p.rho_l < p.rho_x, "rho_l must be below rho_x"),
            (p.rho_l > 0.0 && p.g > 0.0, "rho_l and g must be positive"),
            (p.v0 > 0.0 && p.x_breve > 0.0, "v0 and x_breve must be positive"),
            (p.eta > 0.0, "eta must be positive"),
            (p.alpha >= 0.0, "alpha must be >= 0"),
            (0.0 < p.x_crit && p.x_crit < p.x_max, "x_crit must lie in (0, x_max)"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(format!("material parameters: {msg}")));
            }
        }
        Ok(())
    }

    pub fn delta_rho(&self) -> f64 {
        self.rho_x - self.rho_l
    }
}

/// Constitutive functions for one set of material parameters, with the
/// compression primitive `D` tabulated once at construction.
#[derive(Clone, Debug)]
pub struct Constitutive {
    params: MaterialParams,
    /// `D` at the nodes `X_c + i·h`.
    d_table: Vec<f64>,
    /// Hermite slopes at the same nodes.
    slope_table: Vec<f64>,
    h: f64,
    /// sup of `|f'|` for the batch flux `f(X) = X v_hs(X)` on `[0, X̂]`.
    max_flux_slope: f64,
}

impl Constitutive {
    pub fn new(params: MaterialParams) -> Result<Self> {
        params.validate()?;
        let h = (params.x_max - params.x_crit) / D_TABLE_INTERVALS as f64;
        let mut c = Constitutive {
            params,
            d_table: Vec::with_capacity(D_TABLE_INTERVALS + 1),
            slope_table: Vec::with_capacity(D_TABLE_INTERVALS + 1),
            h,
            max_flux_slope: 0.0,
        };

        let mut acc = 0.0;
        c.d_table.push(0.0);
        for i in 0..D_TABLE_INTERVALS {
            let a = params.x_crit + i as f64 * h;
            let b = if i + 1 == D_TABLE_INTERVALS { params.x_max } else { a + h };
            acc += adaptive_simpson(&|x| c.d_smooth(x), a, b, 1e-16);
            c.d_table.push(acc);
        }
        c.slope_table = (0..=D_TABLE_INTERVALS)
            .map(|i| c.d_smooth(params.x_crit + i as f64 * h))
            .collect();
        limit_slopes(&c.d_table, &mut c.slope_table, h);

        let samples = 100_000;
        c.max_flux_slope = (0..=samples)
            .map(|i| c.flux_slope(params.x_max * i as f64 / samples as f64).abs())
            .fold(params.v0, f64::max);
        Ok(c)
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    fn check(&self, x: f64) -> Result<()> {
        if (0.0..=self.params.x_max).contains(&x) {
            Ok(())
        } else {
            Err(Error::domain("solids concentration X", x, 0.0, self.params.x_max))
        }
    }

    /// Hindered-settling velocity (m/s).
    pub fn v_hs(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.v_hs_raw(x))
    }

    #[inline]
    pub(crate) fn v_hs_raw(&self, x: f64) -> f64 {
        let p = &self.params;
        p.v0 / (1.0 + (x / p.x_breve).powf(p.eta))
    }

    /// Batch settling flux `f(X) = X·v_hs(X)` (kg/(m²·s)).
    #[inline]
    pub(crate) fn batch_flux(&self, x: f64) -> f64 {
        x * self.v_hs_raw(x)
    }

    /// `f'(X) = v0 (1 + (1 - η) w) / (1 + w)²` with `w = (X/X̆)^η`.
    pub(crate) fn flux_slope(&self, x: f64) -> f64 {
        let p = &self.params;
        let w = (x / p.x_breve).powf(p.eta);
        p.v0 * (1.0 + (1.0 - p.eta) * w) / ((1.0 + w) * (1.0 + w))
    }

    pub fn max_flux_slope(&self) -> f64 {
        self.max_flux_slope
    }

    /// Location of the maximum of `f`, if `f` is not monotone.
    pub fn flux_peak(&self) -> Option<f64> {
        let p = &self.params;
        (p.eta > 1.0).then(|| p.x_breve * (p.eta - 1.0).powf(-1.0 / p.eta))
    }

    /// Compression coefficient `d(X) = v_hs(X) ρ_X σ_e'(X) / (g X Δρ)` (m²/s).
    pub fn d_compress(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.d_raw(x))
    }

    #[inline]
    pub(crate) fn d_raw(&self, x: f64) -> f64 {
        if x > self.params.x_crit {
            self.d_smooth(x)
        } else {
            0.0
        }
    }

    /// The analytic branch of `d` for `X ≥ X_c`.
    fn d_smooth(&self, x: f64) -> f64 {
        let p = &self.params;
        self.v_hs_raw(x) * p.rho_x * p.alpha / (p.g * x * p.delta_rho())
    }

    /// `sup d` over `[0, X̂]`, attained as `X → X_c⁺` because `d` decreases there.
    pub fn max_d(&self) -> f64 {
        self.d_smooth(self.params.x_crit)
    }

    /// `D(X) = ∫_{X_c}^X d(s) ds` from the lookup table.
    pub fn d_primitive(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.d_primitive_raw(x))
    }

    #[inline]
    pub(crate) fn d_primitive_raw(&self, x: f64) -> f64 {
        let p = &self.params;
        if x <= p.x_crit {
            return 0.0;
        }
        if x > p.x_max {
            // Beyond the tabulated range: the same integrand, integrated directly.
            let tail = adaptive_simpson(&|y| self.d_smooth(y), p.x_max, x, 1e-16);
            return self.d_table[D_TABLE_INTERVALS] + tail;
        }
        let s = ((x - p.x_crit) / self.h).min(D_TABLE_INTERVALS as f64);
        let i = (s as usize).min(D_TABLE_INTERVALS - 1);
        let t = s - i as f64;
        let (y0, y1) = (self.d_table[i], self.d_table[i + 1]);
        let (m0, m1) = (self.slope_table[i] * self.h, self.slope_table[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    /// `D(X)` by direct adaptive quadrature, bypassing the table.
    pub fn d_primitive_quadrature(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        if x <= self.params.x_crit {
            return Ok(0.0);
        }
        Ok(adaptive_simpson(&|s| self.d_smooth(s), self.params.x_crit, x, 1e-12))
    }

    /// Convective velocity coefficients `(F_C, F_S)` for bulk velocity `q`
    /// and mixture indicator `gamma`.
    pub fn velocity_coefficients(&self, x: f64, q: f64, gamma: bool) -> Result<(f64, f64)> {
        let p = &self.params;
        if !(0.0..p.rho_x).contains(&x) {
            return Err(Error::domain("solids concentration X", x, 0.0, p.rho_x));
        }
        let settling = if gamma { self.v_hs_raw(x) } else { 0.0 };
        let f_c = q + settling;
        let f_s = (p.rho_x * q - f_c * x) / (p.rho_x - x);
        Ok((f_c, f_s))
    }

    /// Solid and liquid phase velocities `(v_X, v_L)` given the local
    /// concentration gradient `dx_dz`.
    pub fn phase_velocities(&self, x: f64, dx_dz: f64, q: f64, gamma: bool) -> Result<(f64, f64)> {
        self.check(x)?;
        let phi = x / self.params.rho_x;
        let v = if gamma {
            self.v_hs_raw(x) - self.d_raw(x) * dx_dz
        } else {
            0.0
        };
        Ok((q + v, q - phi / (1.0 - phi) * v))
    }
}

/// Fritsch–Carlson limiter: keeps the Hermite interpolant of increasing data
/// monotone.
fn limit_slopes(y: &[f64], m: &mut [f64], h: f64) {
    for i in 0..y.len() - 1 {
        let secant = (y[i + 1] - y[i]) / h;
        if secant <= 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / secant;
        let b = m[i + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * secant;
            m[i + 1] = tau * b * secant;
        }
    }
}

pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}
