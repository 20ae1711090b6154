use serde::{Deserialize, Serialize};

/// SI constants. Passed explicitly; there are no globals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
    pub e_charge: f64,
    pub a0: f64,
    pub alpha: f64,
    pub m_electron: f64,
    pub m_proton: f64,
}

pub const CONSTANTS_VERSION: &str = "CODATA-2018";

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        c: 299_792_458.0,
        eps0: 8.854_187_812_8e-12,
        e_charge: 1.602_176_634e-19,
        a0: 5.291_772_109_03e-11,
        alpha: 7.297_352_569_3e-3,
        m_electron: 9.109_383_701_5e-31,
        m_proton: 1.672_621_923_69e-27,
    };

    /// e^2 / (4 pi eps0 hbar c)
    pub fn alpha_from_charge(&self) -> f64 {
        self.e_charge * self.e_charge
            / (4.0 * std::f64::consts::PI * self.eps0 * self.hbar * self.c)
    }

    pub fn is_consistent(&self) -> bool {
        let fields = [
            self.hbar,
            self.c,
            self.eps0,
            self.e_charge,
            self.a0,
            self.alpha,
            self.m_electron,
            self.m_proton,
        ];
        fields.iter().all(|v| v.is_finite() && *v > 0.0)
            && (self.alpha_from_charge() / self.alpha - 1.0).abs() <= 1e-6
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_consistent() {
        let k = PhysicalConstants::CODATA_2018;
        assert!(k.is_consistent());
        assert!((1.0 / k.alpha - 137.035_999_084).abs() < 1e-6);
    }

    #[test]
    fn detects_inconsistency() {
        let mut k = PhysicalConstants::CODATA_2018;
        k.alpha *= 1.0 + 1e-5;
        assert!(!k.is_consistent());
        k = PhysicalConstants::CODATA_2018;
        k.m_proton = -1.0;
        assert!(!k.is_consistent());
    }
}
