//! Robot description files.
//!
//! A model file is a flat list of `key = value` lines (TOML syntax) with
//! lengths in metres, body dimensions in millimetres, masses in grams,
//! ranges in degrees and moments of inertia in g·mm². Missing keys take the
//! prototype's values.

use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    parse_decimal, BodyModel, DactylusModel, JointRange, MassModel, MoiTable, RobotModel,
};

/// The model file shipped with the prototype's values.
pub const DEFAULT_MODEL: &str = include_str!("../models/quadruped.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelFile {
    pub femur_length_m: f64,
    pub tibia_length_m: f64,
    pub coxa_range_deg: f64,
    pub femur_range_deg: f64,
    pub tibia_range_deg: f64,
    pub body_length_mm: f64,
    pub body_width_mm: f64,
    pub body_height_mm: f64,
    pub hip_inset_mm: f64,
    pub body_mass_g: f64,
    pub leg_mass_no_dact_g: f64,
    pub leg_mass_with_dact_g: f64,
    pub total_mass_g: f64,
    pub moi_sagittal_no_dact_gmm2: f64,
    pub moi_coronal_no_dact_gmm2: f64,
    pub moi_sagittal_with_dact_gmm2: f64,
    pub moi_coronal_with_dact_gmm2: f64,
    pub femur_mass_fraction_dact: f64,
    pub femur_mass_fraction_plain: f64,
    pub dactylus_base_length_m: f64,
    pub dactylus_tip_length_m: f64,
}

impl Default for ModelFile {
    fn default() -> Self {
        Self {
            femur_length_m: 0.100,
            tibia_length_m: 0.100,
            coxa_range_deg: 200.0,
            femur_range_deg: 300.0,
            tibia_range_deg: 300.0,
            body_length_mm: 253.0,
            body_width_mm: 118.0,
            body_height_mm: 56.0,
            hip_inset_mm: 15.0,
            body_mass_g: 613.0,
            leg_mass_no_dact_g: 190.2,
            leg_mass_with_dact_g: 244.1,
            total_mass_g: 1481.6,
            moi_sagittal_no_dact_gmm2: 5.39e5,
            moi_coronal_no_dact_gmm2: 7.99e5,
            moi_sagittal_with_dact_gmm2: 8.89e5,
            moi_coronal_with_dact_gmm2: 1.21e6,
            femur_mass_fraction_dact: 0.4,
            femur_mass_fraction_plain: 0.5,
            dactylus_base_length_m: 0.030,
            dactylus_tip_length_m: 0.025,
        }
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("femur_length_m", self.femur_length_m),
            ("tibia_length_m", self.tibia_length_m),
            ("coxa_range_deg", self.coxa_range_deg),
            ("femur_range_deg", self.femur_range_deg),
            ("tibia_range_deg", self.tibia_range_deg),
            ("body_length_mm", self.body_length_mm),
            ("body_width_mm", self.body_width_mm),
            ("body_mass_g", self.body_mass_g),
            ("moi_sagittal_no_dact_gmm2", self.moi_sagittal_no_dact_gmm2),
            ("moi_coronal_no_dact_gmm2", self.moi_coronal_no_dact_gmm2),
            ("dactylus_base_length_m", self.dactylus_base_length_m),
            ("dactylus_tip_length_m", self.dactylus_tip_length_m),
        ];
        for (key, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Model(format!("{key} must be positive, got {v}")));
            }
        }
        for (key, v) in [
            ("femur_mass_fraction_dact", self.femur_mass_fraction_dact),
            ("femur_mass_fraction_plain", self.femur_mass_fraction_plain),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Model(format!("{key} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn mass_model(&self) -> MassModel<f64> {
        MassModel {
            body: self.body_mass_g,
            leg_no_dact: self.leg_mass_no_dact_g,
            leg_with_dact: self.leg_mass_with_dact_g,
            total: self.total_mass_g,
            moi: MoiTable {
                sagittal_no_dact: self.moi_sagittal_no_dact_gmm2,
                coronal_no_dact: self.moi_coronal_no_dact_gmm2,
                sagittal_with_dact: self.moi_sagittal_with_dact_gmm2,
                coronal_with_dact: self.moi_coronal_with_dact_gmm2,
            },
        }
    }

    /// Masses as exact decimals, reconstructed from the shortest decimal
    /// representation of each parsed value.
    pub fn exact_mass_model(&self) -> Result<MassModel<Ratio<i64>>> {
        let exact = |v: f64| {
            parse_decimal(&format!("{v}"))
                .ok_or_else(|| Error::Model(format!("{v} is not a plain decimal")))
        };
        let m = self.mass_model();
        Ok(MassModel {
            body: exact(m.body)?,
            leg_no_dact: exact(m.leg_no_dact)?,
            leg_with_dact: exact(m.leg_with_dact)?,
            total: exact(m.total)?,
            moi: MoiTable {
                sagittal_no_dact: exact(m.moi.sagittal_no_dact)?,
                coronal_no_dact: exact(m.moi.coronal_no_dact)?,
                sagittal_with_dact: exact(m.moi.sagittal_with_dact)?,
                coronal_with_dact: exact(m.moi.coronal_with_dact)?,
            },
        })
    }

    pub fn robot(&self) -> RobotModel<f64> {
        let body = BodyModel {
            length_mm: self.body_length_mm,
            width_mm: self.body_width_mm,
            height_mm: self.body_height_mm,
            hip_inset_mm: self.hip_inset_mm,
        };
        let mut robot = RobotModel::from_parts(
            body,
            self.femur_length_m,
            self.tibia_length_m,
            self.mass_model(),
        );
        for leg in robot.legs.iter_mut() {
            leg.coxa_range = JointRange::symmetric_deg(self.coxa_range_deg);
            leg.femur_range = JointRange::symmetric_deg(self.femur_range_deg);
            leg.tibia_range = JointRange::symmetric_deg(self.tibia_range_deg);
        }
        robot.dactylus = DactylusModel {
            base_length: self.dactylus_base_length_m,
            tip_length: self.dactylus_tip_length_m,
            ..DactylusModel::default()
        };
        robot.femur_fraction_dact = self.femur_mass_fraction_dact;
        robot.femur_fraction_plain = self.femur_mass_fraction_plain;
        robot
    }
}
