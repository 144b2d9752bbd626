//! Stoichiometric reaction framework `R_C = σ_C r`, `R_S = σ_S r` and the
//! built-in anoxic denitrification kinetics.
//!
//! Every rate `r_l` that consumes a component (negative stoichiometric
//! coefficient) must factor as `r_l = r̄_l · c` with `c` the consumed
//! concentration and `r̄_l` bounded. [`RateLaw::rate_factor`] exposes those
//! factors; they prove non-negativity of the pure reaction dynamics and give
//! the explicit schemes their depletion-rate bound.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// COD equivalent of nitrate nitrogen used in the denitrification yield.
pub const NITRATE_COD_FACTOR: f64 = 2.86;

/// A particulate or soluble component by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Species {
    Solid(usize),
    Soluble(usize),
}

/// Component names in storage order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRegistry {
    pub solids: Vec<String>,
    pub solubles: Vec<String>,
}

impl ComponentRegistry {
    pub fn new(solids: Vec<String>, solubles: Vec<String>) -> Result<Self> {
        let mut all: Vec<&String> = solids.iter().chain(&solubles).collect();
        all.sort();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("component '{}' listed twice", w[0])));
        }
        if solids.is_empty() {
            return Err(Error::Config("at least one solid component is required".into()));
        }
        Ok(ComponentRegistry { solids, solubles })
    }

    pub fn k_c(&self) -> usize {
        self.solids.len()
    }

    pub fn k_s(&self) -> usize {
        self.solubles.len()
    }

    pub fn lookup(&self, name: &str) -> Option<Species> {
        if let Some(i) = self.solids.iter().position(|n| n == name) {
            return Some(Species::Solid(i));
        }
        self.solubles.iter().position(|n| n == name).map(Species::Soluble)
    }

    fn solid(&self, name: &str) -> Result<usize> {
        match self.lookup(name) {
            Some(Species::Solid(i)) => Ok(i),
            _ => Err(Error::Config(format!("missing solid component '{name}'"))),
        }
    }

    fn soluble(&self, name: &str) -> Result<usize> {
        match self.lookup(name) {
            Some(Species::Soluble(i)) => Ok(i),
            _ => Err(Error::Config(format!("missing soluble component '{name}'"))),
        }
    }
}

/// Non-negative reaction rates `r(C, S)` (kg/(m³·s)).
pub trait RateLaw: fmt::Debug + Send + Sync {
    fn n_rates(&self) -> usize;

    /// Writes `r(C, S)` into `out`. Inputs must be non-negative.
    fn rates(&self, c: &[f64], s: &[f64], out: &mut [f64]);

    /// The bounded factor `r̄_l` with `r_l = r̄_l · species`, or `None` when
    /// rate `l` is not declared proportional to `species`.
    fn rate_factor(&self, l: usize, species: Species, c: &[f64], s: &[f64]) -> Option<f64>;
}

/// A rate law without reactions.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoReactions;

impl RateLaw for NoReactions {
    fn n_rates(&self) -> usize {
        0
    }

    fn rates(&self, _: &[f64], _: &[f64], _: &mut [f64]) {}

    fn rate_factor(&self, _: usize, _: Species, _: &[f64], _: &[f64]) -> Option<f64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenitrificationParams {
    /// Yield Y.
    pub yield_coeff: f64,
    /// Decay rate b (1/s).
    pub decay: f64,
    /// Fraction of decaying biomass that becomes undegradable, f_P.
    pub f_p: f64,
    /// Maximal growth rate μ_max (1/s).
    pub mu_max: f64,
    /// Nitrate half-saturation K_NO3 (kg/m³).
    pub k_no3: f64,
    /// Substrate half-saturation K_S (kg/m³).
    pub k_s: f64,
}

impl Default for DenitrificationParams {
    fn default() -> Self {
        DenitrificationParams {
            yield_coeff: 0.67,
            decay: 6.94e-6,
            f_p: 0.2,
            mu_max: 5.56e-5,
            k_no3: 5e-4,
            k_s: 0.02,
        }
    }
}

impl DenitrificationParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(0.0 < p.yield_coeff && p.yield_coeff < 1.0) {
            return Err(Error::Config("denitrification: Y must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&p.f_p) {
            return Err(Error::Config("denitrification: f_P must lie in [0, 1]".into()));
        }
        if !(p.decay > 0.0 && p.mu_max > 0.0 && p.k_no3 > 0.0 && p.k_s > 0.0) {
            return Err(Error::Config(
                "denitrification: rates and half-saturation constants must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `Ȳ = (1 - Y) / (2.86 Y)`.
    pub fn y_bar(&self) -> f64 {
        (1.0 - self.yield_coeff) / (NITRATE_COD_FACTOR * self.yield_coeff)
    }
}

/// Growth and decay of heterotrophs with nitrate as electron acceptor.
///
/// Rates: `r = X_OHO · (μ(S), b)`.
#[derive(Clone, Debug)]
pub struct Denitrification {
    params: DenitrificationParams,
    x_oho: usize,
    x_u: usize,
    s_no3: usize,
    s_s: usize,
    s_n2: usize,
}

impl Denitrification {
    pub const SOLIDS: [&'static str; 2] = ["X_OHO", "X_U"];
    pub const SOLUBLES: [&'static str; 3] = ["S_NO3", "S_S", "S_N2"];

    pub fn new(params: DenitrificationParams, registry: &ComponentRegistry) -> Result<Self> {
        params.validate()?;
        Ok(Denitrification {
            params,
            x_oho: registry.solid("X_OHO")?,
            x_u: registry.solid("X_U")?,
            s_no3: registry.soluble("S_NO3")?,
            s_s: registry.soluble("S_S")?,
            s_n2: registry.soluble("S_N2")?,
        })
    }

    pub fn params(&self) -> &DenitrificationParams {
        &self.params
    }

    /// Monod growth rate `μ(S)` (1/s).
    pub fn growth_rate_mu(&self, s: &[f64]) -> Result<f64> {
        if let Some(&v) = s.iter().find(|&&v| !(v >= 0.0)) {
            return Err(Error::domain("substrate concentration", v, 0.0, f64::INFINITY));
        }
        Ok(self.mu(s))
    }

    #[inline]
    fn mu(&self, s: &[f64]) -> f64 {
        let p = &self.params;
        let no3 = s[self.s_no3];
        let ss = s[self.s_s];
        p.mu_max * no3 / (p.k_no3 + no3) * ss / (p.k_s + ss)
    }

    /// `(σ_C, σ_S)` in registry order, rows = components, columns = rates.
    pub fn stoichiometry(&self, registry: &ComponentRegistry) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let p = &self.params;
        let y_bar = p.y_bar();
        let mut sigma_c = vec![vec![0.0; 2]; registry.k_c()];
        let mut sigma_s = vec![vec![0.0; 2]; registry.k_s()];
        sigma_c[self.x_oho] = vec![1.0, -1.0];
        sigma_c[self.x_u] = vec![0.0, p.f_p];
        sigma_s[self.s_no3] = vec![-y_bar, 0.0];
        sigma_s[self.s_s] = vec![-1.0 / p.yield_coeff, 1.0 - p.f_p];
        sigma_s[self.s_n2] = vec![y_bar, 0.0];
        (sigma_c, sigma_s)
    }
}

impl RateLaw for Denitrification {
    fn n_rates(&self) -> usize {
        2
    }

    fn rates(&self, c: &[f64], s: &[f64], out: &mut [f64]) {
        let x = c[self.x_oho];
        out[0] = x * self.mu(s);
        out[1] = x * self.params.decay;
    }

    fn rate_factor(&self, l: usize, species: Species, c: &[f64], s: &[f64]) -> Option<f64> {
        let p = &self.params;
        let x = c[self.x_oho];
        let no3 = s[self.s_no3];
        let ss = s[self.s_s];
        match (l, species) {
            (0, Species::Solid(k)) if k == self.x_oho => Some(self.mu(s)),
            (0, Species::Soluble(k)) if k == self.s_no3 => {
                Some(x * p.mu_max / (p.k_no3 + no3) * ss / (p.k_s + ss))
            }
            (0, Species::Soluble(k)) if k == self.s_s => {
                Some(x * p.mu_max * no3 / (p.k_no3 + no3) / (p.k_s + ss))
            }
            (1, Species::Solid(k)) if k == self.x_oho => Some(p.decay),
            _ => None,
        }
    }
}

/// Stoichiometry plus rate law over a fixed component registry.
#[derive(Clone, Debug)]
pub struct ReactionModel {
    registry: ComponentRegistry,
    sigma_c: Vec<Vec<f64>>,
    sigma_s: Vec<Vec<f64>>,
    law: Arc<dyn RateLaw>,
}

impl ReactionModel {
    pub fn new(
        registry: ComponentRegistry,
        sigma_c: Vec<Vec<f64>>,
        sigma_s: Vec<Vec<f64>>,
        law: Arc<dyn RateLaw>,
    ) -> Result<Self> {
        let k_r = law.n_rates();
        let shape_ok = |m: &[Vec<f64>], rows: usize| m.len() == rows && m.iter().all(|r| r.len() == k_r);
        if !shape_ok(&sigma_c, registry.k_c()) || !shape_ok(&sigma_s, registry.k_s()) {
            return Err(Error::Config(format!(
                "stoichiometric matrices must be {}x{k_r} and {}x{k_r}",
                registry.k_c(),
                registry.k_s()
            )));
        }
        if sigma_c.iter().chain(&sigma_s).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("stoichiometric coefficients must be finite".into()));
        }

        // every consuming (rate, component) pair needs a declared factor
        let c0 = vec![1.0; registry.k_c()];
        let s0 = vec![1.0; registry.k_s()];
        let consumers = sigma_c
            .iter()
            .enumerate()
            .map(|(k, row)| (Species::Solid(k), row))
            .chain(sigma_s.iter().enumerate().map(|(k, row)| (Species::Soluble(k), row)));
        for (species, row) in consumers {
            for (l, &coeff) in row.iter().enumerate() {
                if coeff < 0.0 && law.rate_factor(l, species, &c0, &s0).is_none() {
                    let name = match species {
                        Species::Solid(k) => &registry.solids[k],
                        Species::Soluble(k) => &registry.solubles[k],
                    };
                    return Err(Error::Config(format!(
                        "rate {l} consumes '{name}' but is not declared proportional to it"
                    )));
                }
            }
        }
        Ok(ReactionModel {
            registry,
            sigma_c,
            sigma_s,
            law,
        })
    }

    /// The built-in denitrification model with its own stoichiometry.
    pub fn denitrification(params: DenitrificationParams) -> Result<Self> {
        let registry = ComponentRegistry::new(
            Denitrification::SOLIDS.iter().map(|s| s.to_string()).collect(),
            Denitrification::SOLUBLES.iter().map(|s| s.to_string()).collect(),
        )?;
        let law = Denitrification::new(params, &registry)?;
        let (sigma_c, sigma_s) = law.stoichiometry(&registry);
        Self::new(registry, sigma_c, sigma_s, Arc::new(law))
    }

    /// A model without reactions for the given components.
    pub fn inert(registry: ComponentRegistry) -> Self {
        let sigma_c = vec![Vec::new(); registry.k_c()];
        let sigma_s = vec![Vec::new(); registry.k_s()];
        ReactionModel {
            registry,
            sigma_c,
            sigma_s,
            law: Arc::new(NoReactions),
        }
    }

    pub fn registry(&self) -> &ComponentRegistry {
        &self.registry
    }

    pub fn k_c(&self) -> usize {
        self.registry.k_c()
    }

    pub fn k_s(&self) -> usize {
        self.registry.k_s()
    }

    pub fn k_r(&self) -> usize {
        self.law.n_rates()
    }

    pub fn sigma_c(&self) -> &[Vec<f64>] {
        &self.sigma_c
    }

    pub fn sigma_s(&self) -> &[Vec<f64>] {
        &self.sigma_s
    }

    pub fn rate_law(&self) -> &dyn RateLaw {
        self.law.as_ref()
    }

    fn check_state(&self, c: &[f64], s: &[f64]) -> Result<()> {
        if c.len() != self.k_c() || s.len() != self.k_s() {
            return Err(Error::Config(format!(
                "state has ({}, {}) components, model expects ({}, {})",
                c.len(),
                s.len(),
                self.k_c(),
                self.k_s()
            )));
        }
        if let Some(&v) = c.iter().chain(s).find(|&&v| !(v >= 0.0)) {
            return Err(Error::domain("concentration", v, 0.0, f64::INFINITY));
        }
        Ok(())
    }

    /// `(R_C, R_S)` at a non-negative state.
    pub fn reaction_terms(&self, c: &[f64], s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(c, s)?;
        let mut rates = vec![0.0; self.k_r()];
        let mut rc = vec![0.0; self.k_c()];
        let mut rs = vec![0.0; self.k_s()];
        self.evaluate(c, s, &mut rates, &mut rc, &mut rs);
        Ok((rc, rs))
    }

    /// Unchecked evaluation into caller-provided buffers.
    #[inline]
    pub(crate) fn evaluate(&self, c: &[f64], s: &[f64], rates: &mut [f64], rc: &mut [f64], rs: &mut [f64]) {
        self.law.rates(c, s, rates);
        for (out, row) in rc.iter_mut().zip(&self.sigma_c) {
            *out = row.iter().zip(rates.iter()).map(|(a, r)| a * r).sum();
        }
        for (out, row) in rs.iter_mut().zip(&self.sigma_s) {
            *out = row.iter().zip(rates.iter()).map(|(a, r)| a * r).sum();
        }
    }

    /// `(R̃_C, R̃_S)`: total production of solids and of solubles.
    pub fn total_rates(&self, c: &[f64], s: &[f64]) -> Result<(f64, f64)> {
        let (rc, rs) = self.reaction_terms(c, s)?;
        Ok((rc.iter().sum(), rs.iter().sum()))
    }

    /// Largest relative depletion rate `Σ_l |σ_kl| r̄_l` over all components
    /// (1/s). An explicit Euler reaction step of length `dt` keeps every
    /// component non-negative when `dt` times this bound is at most one.
    pub fn depletion_bound(&self, c: &[f64], s: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let rows = self
            .sigma_c
            .iter()
            .enumerate()
            .map(|(k, row)| (Species::Solid(k), row))
            .chain(self.sigma_s.iter().enumerate().map(|(k, row)| (Species::Soluble(k), row)));
        for (species, row) in rows {
            let mut total = 0.0;
            for (l, &coeff) in row.iter().enumerate() {
                if coeff < 0.0 {
                    total += -coeff * self.law.rate_factor(l, species, c, s).unwrap_or(0.0);
                }
            }
            worst = worst.max(total);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> ReactionModel {
        ReactionModel::denitrification(DenitrificationParams::default()).unwrap()
    }

    fn law() -> Denitrification {
        let m = model();
        Denitrification::new(DenitrificationParams::default(), m.registry()).unwrap()
    }

    #[test]
    fn growth_rate_values() {
        let d = law();
        assert_eq!(d.growth_rate_mu(&[0.0, 0.3, 0.0]).unwrap(), 0.0);
        assert!((d.growth_rate_mu(&[5e-4, 0.02, 0.0]).unwrap() - 1.39e-5).abs() < 1e-18);
        // direct evaluation oracle
        let feed = d.growth_rate_mu(&[6e-3, 9e-4, 0.0]).unwrap();
        assert!((feed - 2.210084652189915e-6).abs() < 1e-19);
        assert!(d.growth_rate_mu(&[-1e-3, 0.0, 0.0]).is_err());
    }

    #[test]
    fn y_bar_arithmetic() {
        assert!((DenitrificationParams::default().y_bar() - 0.17221584385763486).abs() < 1e-16);
    }

    #[test]
    fn no_biomass_no_reactions() {
        let (rc, rs) = model().reaction_terms(&[0.0, 3.0], &[1e-3, 1e-3, 0.0]).unwrap();
        assert!(rc.iter().chain(&rs).all(|&r| r == 0.0));
        assert_eq!(model().total_rates(&[0.0, 3.0], &[1e-3, 1e-3, 0.0]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn decay_only_limit() {
        let p = DenitrificationParams::default();
        let x = 4.0;
        let (rc, rs) = model().reaction_terms(&[x, 1.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(rc, vec![-p.decay * x, p.f_p * p.decay * x]);
        assert_eq!(rs, vec![0.0, (1.0 - p.f_p) * p.decay * x, 0.0]);
        let (tc, ts) = model().total_rates(&[x, 1.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((tc + ts).abs() < 1e-20);
        assert!((ts - (1.0 - p.f_p) * p.decay * x).abs() < 1e-20);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = model();
        assert!(m.reaction_terms(&[1.0], &[0.0, 0.0, 0.0]).is_err());
        assert!(m.reaction_terms(&[1.0, 0.0], &[0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn undeclared_consumption_is_rejected() {
        let m = model();
        let mut sigma_s = m.sigma_s().to_vec();
        // make S_N2 a consumer of the growth rate, which is not proportional to it
        sigma_s[2][0] = -0.1;
        let err = ReactionModel::new(m.registry().clone(), m.sigma_c().to_vec(), sigma_s, m.law.clone());
        assert!(err.is_err());
    }

    #[test]
    fn missing_component_name_is_rejected() {
        let reg = ComponentRegistry::new(vec!["X_OHO".into(), "X_I".into()], vec!["S_NO3".into(), "S_S".into(), "S_N2".into()])
            .unwrap();
        assert!(Denitrification::new(DenitrificationParams::default(), &reg).is_err());
        assert!(ComponentRegistry::new(vec!["A".into()], vec!["A".into()]).is_err());
    }

    proptest! {
        #[test]
        fn rates_are_nonnegative(x in 0.0..30.0f64, xu in 0.0..30.0f64,
                                 no3 in 0.0..0.05f64, ss in 0.0..0.5f64, n2 in 0.0..0.05f64) {
            let m = model();
            let mut r = [0.0; 2];
            m.rate_law().rates(&[x, xu], &[no3, ss, n2], &mut r);
            prop_assert!(r.iter().all(|&v| v >= 0.0));
            prop_assert!(law().growth_rate_mu(&[no3, ss, n2]).unwrap() <= 5.56e-5);
        }

        #[test]
        fn quasi_positivity(x in 0.0..30.0f64, xu in 0.0..30.0f64,
                            no3 in 0.0..0.05f64, ss in 0.0..0.5f64, n2 in 0.0..0.05f64,
                            which in 0usize..5) {
            let m = model();
            let mut c = [x, xu];
            let mut s = [no3, ss, n2];
            if which < 2 { c[which] = 0.0 } else { s[which - 2] = 0.0 }
            let (rc, rs) = m.reaction_terms(&c, &s).unwrap();
            let produced = if which < 2 { rc[which] } else { rs[which - 2] };
            prop_assert!(produced >= 0.0);
        }

        #[test]
        fn declared_factors_reproduce_rates(x in 0.0..30.0f64, no3 in 0.0..0.05f64, ss in 0.0..0.5f64) {
            let m = model();
            let (c, s) = ([x, 1.0], [no3, ss, 0.0]);
            let mut r = [0.0; 2];
            m.rate_law().rates(&c, &s, &mut r);
            let f = |l, sp| m.rate_law().rate_factor(l, sp, &c, &s).unwrap();
            let tol = 1e-15 * (1.0 + r[0].abs());
            prop_assert!((f(0, Species::Solid(0)) * x - r[0]).abs() <= tol);
            prop_assert!((f(0, Species::Soluble(0)) * no3 - r[0]).abs() <= tol);
            prop_assert!((f(0, Species::Soluble(1)) * ss - r[0]).abs() <= tol);
            prop_assert!((f(1, Species::Solid(0)) * x - r[1]).abs() <= 1e-15 * (1.0 + r[1]));
        }

        #[test]
        fn total_rates_sign(x in 0.0..30.0f64, no3 in 0.0..0.05f64, ss in 0.0..0.5f64) {
            let m = model();
            let p = DenitrificationParams::default();
            let mu = law().growth_rate_mu(&[no3, ss, 0.0]).unwrap();
            let (tc, ts) = m.total_rates(&[x, 0.5], &[no3, ss, 0.0]).unwrap();
            let expected = mu * x * (1.0 - 1.0 / p.yield_coeff);
            prop_assert!((tc + ts - expected).abs() <= 1e-14 * (1.0 + expected.abs()));
            prop_assert!(tc + ts <= 1e-18);
        }
    }

    #[test]
    fn conserved_combinations_are_null_vectors() {
        // (a) S_NO3 + S_N2, (b) X_OHO + X_U + S_S - 2.86 S_NO3
        let m = model();
        let weights_a = ([0.0, 0.0], [1.0, 0.0, 1.0]);
        let weights_b = ([1.0, 1.0], [-NITRATE_COD_FACTOR, 1.0, 0.0]);
        for (wc, ws) in [weights_a, weights_b] {
            for l in 0..m.k_r() {
                let dot: f64 = (0..2).map(|k| wc[k] * m.sigma_c()[k][l]).sum::<f64>()
                    + (0..3).map(|k| ws[k] * m.sigma_s()[k][l]).sum::<f64>();
                assert!(dot.abs() < 1e-15, "rate {l}: {dot}");
            }
        }
    }
}
