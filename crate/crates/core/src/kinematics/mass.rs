//! Mass and moment-of-inertia figures of the robot.
//!
//! Generic over any numeric type so the mass-sum identity can be checked in
//! exact rational arithmetic as well as in floating point.

use num_rational::Ratio;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Moments of inertia of one leg, g·mm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoiTable<T> {
    /// About the femur motor axis.
    pub sagittal_no_dact: T,
    /// About the coxa motor axis.
    pub coronal_no_dact: T,
    pub sagittal_with_dact: T,
    pub coronal_with_dact: T,
}

/// Masses in grams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassModel<T> {
    pub body: T,
    pub leg_no_dact: T,
    pub leg_with_dact: T,
    /// Quoted total; two legs of each kind plus the body.
    pub total: T,
    pub moi: MoiTable<T>,
}

impl<T: Num + Clone> MassModel<T> {
    /// `body + 2·leg_no_dact + 2·leg_with_dact`.
    pub fn mass_sum(&self) -> T {
        let two = T::one() + T::one();
        self.body.clone()
            + two.clone() * self.leg_no_dact.clone()
            + two * self.leg_with_dact.clone()
    }

    /// `mass_sum - total`.
    pub fn mass_residual(&self) -> T {
        self.mass_sum() - self.total.clone()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> MassModel<U> {
        MassModel {
            body: f(&self.body),
            leg_no_dact: f(&self.leg_no_dact),
            leg_with_dact: f(&self.leg_with_dact),
            total: f(&self.total),
            moi: MoiTable {
                sagittal_no_dact: f(&self.moi.sagittal_no_dact),
                coronal_no_dact: f(&self.moi.coronal_no_dact),
                sagittal_with_dact: f(&self.moi.sagittal_with_dact),
                coronal_with_dact: f(&self.moi.coronal_with_dact),
            },
        }
    }
}

impl MassModel<Ratio<i64>> {
    /// Catalogue values as exact decimals.
    pub fn catalogue_exact() -> Self {
        let r = |s: &str| parse_decimal(s).expect("valid literal");
        MassModel {
            body: r("613"),
            leg_no_dact: r("190.2"),
            leg_with_dact: r("244.1"),
            total: r("1481.6"),
            moi: MoiTable {
                sagittal_no_dact: r("539000"),
                coronal_no_dact: r("799000"),
                sagittal_with_dact: r("889000"),
                coronal_with_dact: r("1210000"),
            },
        }
    }
}

impl<T: Real> MassModel<T> {
    /// Catalogue values of the prototype.
    pub fn catalogue() -> Self {
        MassModel::catalogue_exact()
            .map(|r| T::from_f64(*r.numer() as f64 / *r.denom() as f64).expect("representable"))
    }
}

impl<T: Real> Default for MassModel<T> {
    fn default() -> Self {
        Self::catalogue()
    }
}

/// Parses a plain decimal such as `-190.25` or `1.21e6` into an exact ratio.
pub fn parse_decimal(text: &str) -> Option<Ratio<i64>> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let numer: i64 = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let value = if scale >= 0 {
        Ratio::from_integer(numer.checked_mul(pow)?)
    } else {
        Ratio::new(numer, pow)
    };
    Some(if negative { -value } else { value })
}

/// Relative growth of leg inertia when the dactylus is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoiReport<T> {
    pub sagittal_increase: T,
    pub coronal_increase: T,
    /// Mean of the two, as a fraction (0.58 = 58 %).
    pub mean_increase: T,
}

pub fn moi_report<T: Real>(moi: &MoiTable<T>) -> MoiReport<T> {
    let sagittal = moi.sagittal_with_dact / moi.sagittal_no_dact - T::one();
    let coronal = moi.coronal_with_dact / moi.coronal_no_dact - T::one();
    MoiReport {
        sagittal_increase: sagittal,
        coronal_increase: coronal,
        mean_increase: (sagittal + coronal) / T::lit(2.0),
    }
}
