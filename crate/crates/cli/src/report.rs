//! `report`: mass-sum identity and inertia growth of the loaded model.

use dactyl_core::kinematics::moi_report;
use num_rational::Ratio;

use crate::settings::Flags;
use crate::{Failure, Outcome};

/// Largest tolerated gap between the summed masses and the quoted total, g.
const MASS_TOLERANCE_G: f64 = 0.1;

fn decimal(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn run(flags: &Flags) -> Outcome {
    let model = flags.model()?;
    let floats = model.mass_model();
    // Exact when every figure is a plain decimal, which is the usual case.
    let (sum, residual, exact) = match model.exact_mass_model() {
        Ok(m) => (decimal(&m.mass_sum()), decimal(&m.mass_residual()), true),
        Err(_) => (floats.mass_sum(), floats.mass_residual(), false),
    };
    let moi = moi_report(&floats.moi);

    println!("body                      {:>9} g", floats.body);
    println!("leg without dactylus  2 × {:>9} g", floats.leg_no_dact);
    println!("leg with dactylus     2 × {:>9} g", floats.leg_with_dact);
    println!("sum                       {:>9} g", sum);
    println!("quoted total              {:>9} g", floats.total);
    println!(
        "residual                  {:>9} g ({})",
        residual,
        if exact { "exact" } else { "floating point" }
    );
    println!(
        "sagittal inertia increase {:>8.1} %",
        100.0 * moi.sagittal_increase
    );
    println!(
        "coronal inertia increase  {:>8.1} %",
        100.0 * moi.coronal_increase
    );
    println!(
        "mean inertia increase     {:>8.1} %",
        100.0 * moi.mean_increase
    );

    if residual.abs() > MASS_TOLERANCE_G {
        return Err(Failure::Runtime(format!(
            "masses sum to {sum} g but the model quotes {} g",
            floats.total
        )));
    }
    Ok(())
}
