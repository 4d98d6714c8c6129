//! Synthetic stand-in for the recidivism table.
//!
//! Marginals are calibrated to the public file's documented summaries: a
//! minority group 1 of roughly a third of rows, group 0 younger with more
//! prior offenses, and group base rates set by the caller. Labels are drawn
//! from a logistic risk in the features, with a per-group intercept solved so
//! empirical base rates approximate the requested prevalences.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::data::{canonical_schema, Dataset};
use crate::error::{Error, Result};
use crate::seed;

struct GroupProfile {
    age_geom_p: f64,
    age_shift: i64,
    priors_mean: f64,
    juv_zero: [f64; 3],
    felony_rate: f64,
    female_rate: f64,
}

const PROFILES: [GroupProfile; 2] = [
    // Group 0: younger, more priors.
    GroupProfile {
        age_geom_p: 0.13,
        age_shift: 0,
        priors_mean: 3.8,
        juv_zero: [0.93, 0.89, 0.87],
        felony_rate: 0.66,
        female_rate: 0.18,
    },
    // Group 1: older, fewer priors.
    GroupProfile {
        age_geom_p: 0.13,
        age_shift: 5,
        priors_mean: 2.1,
        juv_zero: [0.97, 0.94, 0.93],
        felony_rate: 0.60,
        female_rate: 0.21,
    },
];

fn geometric(rng: &mut ChaCha20Rng, p: f64) -> i64 {
    // Failures before the first success.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    (u.ln() / (1.0 - p).ln()).floor() as i64
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Risk score driving the label draw; the trained model rediscovers it.
fn risk(age: i64, priors: i64, juv_total: i64, sex: i64, felony: i64) -> f64 {
    0.145 * priors as f64 - 0.036 * (age - 18) as f64 + 0.33 * juv_total as f64
        - 0.30 * sex as f64
        + 0.10 * felony as f64
}

/// Intercept such that the mean of `sigmoid(z + c)` over `zs` hits `target`.
fn calibrate_intercept(zs: &[f64], target: f64) -> f64 {
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mean = zs.iter().map(|&z| sigmoid(z + mid)).sum::<f64>() / zs.len() as f64;
        if mean < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generates a synthetic dataset under the canonical schema.
///
/// `group_fraction` is the expected share of rows in group 1, drawn per row;
/// `prevalence_by_group` gives the target label base rates `(group 0, group 1)`.
pub fn generate_synthetic(
    n_rows: usize,
    group_fraction: f64,
    prevalence_by_group: (f64, f64),
    gen_seed: u64,
) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::invalid("synthetic dataset needs at least one row"));
    }
    if !(0.0 < group_fraction && group_fraction < 1.0) {
        return Err(Error::invalid(format!("group fraction {group_fraction} must lie in (0, 1)")));
    }
    for prev in [prevalence_by_group.0, prevalence_by_group.1] {
        if !(0.0 < prev && prev < 1.0) {
            return Err(Error::invalid(format!("prevalence {prev} must lie in (0, 1)")));
        }
    }

    let schema = canonical_schema();
    let width = schema.n_features();
    let mut rng = seed::stream(gen_seed, "synthetic", &[n_rows as u64]);

    let mut features = Vec::with_capacity(n_rows * width);
    let mut groups = Vec::with_capacity(n_rows);
    let mut risks = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let group: i64 = i64::from(rng.gen_bool(group_fraction));
        let profile = &PROFILES[group as usize];

        let sex = i64::from(rng.gen_bool(profile.female_rate));
        let age = (18 + profile.age_shift
            + geometric(&mut rng, profile.age_geom_p)
            + geometric(&mut rng, profile.age_geom_p))
        .min(90);
        let lambda = Exp::new(1.0 / profile.priors_mean)
            .expect("positive rate")
            .sample(&mut rng);
        let priors = (Poisson::new(lambda.max(1e-9)).expect("positive mean").sample(&mut rng) as i64)
            .min(38);
        let mut juv = [0i64; 3];
        for (j, v) in juv.iter_mut().enumerate() {
            if !rng.gen_bool(profile.juv_zero[j]) {
                *v = (1 + Poisson::new(0.4).unwrap().sample(&mut rng) as i64).min(6);
            }
        }
        let felony = i64::from(rng.gen_bool(profile.felony_rate));

        features.extend_from_slice(&[
            sex,
            group,
            sex * group,
            1 - felony,
            felony,
            i64::from(age < 25),
            i64::from((25..=45).contains(&age)),
            i64::from(age > 45),
            age,
            juv[0],
            juv[1],
            juv[2],
            priors,
        ]);
        groups.push(group as usize);
        risks.push(risk(age, priors, juv[0] + juv[1] + juv[2], sex, felony));
    }

    let mut intercepts = [0.0f64; 2];
    for g in 0..2 {
        let zs: Vec<f64> =
            risks.iter().zip(&groups).filter(|(_, &grp)| grp == g).map(|(&z, _)| z).collect();
        if zs.is_empty() {
            return Err(Error::invalid(format!(
                "synthetic draw produced no rows in group {g}; increase n or adjust group_fraction"
            )));
        }
        let target = if g == 0 { prevalence_by_group.0 } else { prevalence_by_group.1 };
        intercepts[g] = calibrate_intercept(&zs, target);
    }

    let mut label_rng = seed::stream(gen_seed, "synthetic-labels", &[n_rows as u64]);
    let labels: Vec<u8> = risks
        .iter()
        .zip(&groups)
        .map(|(&z, &g)| u8::from(label_rng.gen_bool(sigmoid(z + intercepts[g]))))
        .collect();

    Dataset::new(schema, features, labels)
}
