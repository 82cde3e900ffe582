//! The nested quotients `φ = g'/(g² ω̂)`, `phi = (g/g') φ'` and
//! `Phi = (g/g') phi'` of one side of the data, computed with jets.

use crate::jets::{Jet, JetError};

/// Quantities of one side (`i = 1` in `u` or `i = 2` in `v`) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SideQuantities {
    pub varphi: f64,
    /// `None` when the quotient by `g'` has a genuine pole.
    pub phi: Option<f64>,
    pub big_phi: Option<f64>,
    pub varphi_jet: Jet,
    pub phi_jet: Option<Jet>,
}

/// `(g · q') / g'`, letting jet cancellation resolve a zero of `g'` when
/// the numerator vanishes as well.
fn nested(g: &Jet, gp: &Jet, q: &Jet) -> Result<Jet, JetError> {
    let qp = q.derivative()?;
    let k = qp.order().min(gp.order());
    let num = g.truncate(k).mul(&qp.truncate(k))?;
    num.div(&gp.truncate(k))
}

/// Needs `g ≠ 0` and `ω̂ ≠ 0` at the base point; the nested quotients are
/// optional.
pub fn side_quantities(g: &Jet, w: &Jet) -> Result<SideQuantities, JetError> {
    let gp = g.derivative()?;
    let k = gp.order();
    let den = g.square().mul(w)?.truncate(k);
    let varphi_jet = gp.div(&den)?;
    if varphi_jet.order() < k {
        // g² ω̂ vanishes at the point: φ has a pole
        return Err(JetError::Pole {
            numerator: 0,
            denominator: k - varphi_jet.order(),
        });
    }
    let phi_jet = if varphi_jet.order() >= 1 {
        nested(g, &gp, &varphi_jet).ok()
    } else {
        None
    };
    let big_phi = phi_jet
        .as_ref()
        .filter(|j| j.order() >= 1)
        .and_then(|p| nested(g, &gp, p).ok())
        .map(|j| j.value());
    Ok(SideQuantities {
        varphi: varphi_jet.value(),
        phi: phi_jet.as_ref().map(|j| j.value()),
        big_phi,
        varphi_jet,
        phi_jet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn q(g: &str, w: &str, x: f64) -> SideQuantities {
        let g = parse(g).unwrap().eval_jet(x, 8).unwrap();
        let w = parse(w).unwrap().eval_jet(x, 8).unwrap();
        side_quantities(&g, &w).unwrap()
    }

    #[test]
    fn enneper_sides() {
        // g = u, ω̂ = 1: φ = 1/u², phi = u·(−2/u³) = −2/u², Phi = u·(4/u³) = 4/u²
        let s = q("u", "1", 2.0);
        assert!((s.varphi - 0.25).abs() < 1e-15);
        assert!((s.phi.unwrap() + 0.5).abs() < 1e-15);
        assert!((s.big_phi.unwrap() - 1.0).abs() < 1e-14);
        // g = −v, ω̂ = 1: φ = −1/v²
        let s = q("-v", "1", -1.0);
        assert!((s.varphi + 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_side() {
        // g = e^u, ω̂ = 1: φ = e^{−u}, phi = −e^{−u}, Phi = e^{−u}
        let s = q("exp(u)", "1", 0.0);
        assert!((s.varphi - 1.0).abs() < 1e-15);
        assert!((s.phi.unwrap() + 1.0).abs() < 1e-15);
        assert!((s.big_phi.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn critical_point_of_g_leaves_nested_unresolved() {
        // g = 1 + u², g' = 0 at 0 while φ' ≠ 0
        let s = q("1 + u^2", "1", 0.0);
        assert_eq!(s.varphi, 0.0);
        assert!(s.phi.is_none());
    }

    #[test]
    fn vanishing_weight_is_a_pole() {
        let g = parse("u + 2").unwrap().eval_jet(0.0, 8).unwrap();
        let w = parse("u").unwrap().eval_jet(0.0, 8).unwrap();
        assert!(side_quantities(&g, &w).is_err());
    }
}
