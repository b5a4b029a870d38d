//! Positive-transfer study for two one-layer models sharing their single
//! weight vector.
//!
//! Data for each task is generated by a planted one-layer ReLU model; the
//! shared vector is fit to both tasks jointly and the angle between the
//! estimate and the first task's planted vector is reported across sample
//! sizes.

use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::numerics::Matrix;
use crate::rng::{rng_for, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct TransferPoint {
    pub angle_deg: f64,
    pub n: usize,
    pub seed: u64,
    pub sin_error: f64,
}

fn unit_vector_pair<T: Scalar>(m: usize, angle_rad: f64) -> (Matrix<T>, Matrix<T>) {
    // theta_a = e1; theta_b rotated by the angle in the (e1, e2) plane
    let mut a = Matrix::zeros(m, 1);
    a[(0, 0)] = T::one();
    let mut b = Matrix::zeros(m, 1);
    b[(0, 0)] = T::from_f64(angle_rad.cos());
    if m > 1 {
        b[(1, 0)] = T::from_f64(angle_rad.sin());
    }
    (a, b)
}

pub fn sin_between<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    let dot: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x * y).to_f64())
        .sum();
    let na = a.frobenius_norm().to_f64();
    let nb = b.frobenius_norm().to_f64();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let cos = (dot / (na * nb)).clamp(-1.0, 1.0);
    (1.0 - cos * cos).max(0.0).sqrt()
}

/// One grid point: generate both tasks at sample size `n`, fit the shared
/// vector, report `sin(w, theta_a)`.
pub fn positive_transfer_point<T: Scalar>(
    m: usize,
    n_a: usize,
    n_b: usize,
    angle_rad: f64,
    seed: u64,
) -> Result<TransferPoint> {
    let (theta_a, theta_b) = unit_vector_pair::<T>(m, angle_rad);
    let mut rng = rng_for(seed, Stream::Experiment, 50);
    let mut gauss = |rows: usize, cols: usize| {
        Matrix::<T>::from_fn(rows, cols, |_, _| {
            T::from_f64(<StandardNormal as Distribution<f64>>::sample(
                &StandardNormal,
                &mut rng,
            ))
        })
    };
    let m_a = gauss(n_a, m);
    let m_b = gauss(n_b, m);
    let relu = |v: Matrix<T>| v.map(|x| if x > T::zero() { x } else { T::zero() });
    let y_a = relu(m_a.matmul(&theta_a)?);
    let y_b = relu(m_b.matmul(&theta_b)?);

    // joint loss: |relu(M_a w) - y_a|^2 + |relu(M_b w) - y_b|^2
    let grad = |w: &Matrix<T>| -> Result<Matrix<T>> {
        let mut g = Matrix::zeros(m, 1);
        for (mm, yy) in [(&m_a, &y_a), (&m_b, &y_b)] {
            let z = mm.matmul(w)?;
            let resid = relu(z.clone()).sub(yy)?;
            let masked = resid.hadamard(&z.map(|v| if v > T::zero() { T::one() } else { T::zero() }))?;
            g.add_assign_scaled(&mm.transpose_matmul(&masked)?, T::from_f64(2.0))?;
        }
        Ok(g)
    };
    let loss = |w: &Matrix<T>| -> Result<T> {
        let la = relu(m_a.matmul(w)?).sub(&y_a)?.frobenius_norm().powi(2);
        let lb = relu(m_b.matmul(w)?).sub(&y_b)?.frobenius_norm().powi(2);
        Ok(la + lb)
    };

    let mut best: Option<(T, Matrix<T>)> = None;
    for restart in 0..3u64 {
        let mut init_rng = rng_for(seed, Stream::Init, 60 + restart);
        let mut w = Matrix::<T>::from_fn(m, 1, |_, _| {
            T::from_f64(
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut init_rng)
                    * 0.5,
            )
        });
        let mut state = crate::numerics::AdamState::new(m, 1, T::from_f64(0.02));
        for _ in 0..2500 {
            let g = grad(&w)?;
            state.apply(&mut w, &g)?;
        }
        let l = loss(&w)?;
        if best.as_ref().map_or(true, |(b, _)| l < *b) {
            best = Some((l, w));
        }
    }
    let (_, w) = best.expect("restarts ran");
    Ok(TransferPoint {
        angle_deg: angle_rad.to_degrees(),
        n: n_a,
        seed,
        sin_error: sin_between(&w, &theta_a),
    })
}

/// Full grid over sample sizes, angles, and seeds.
pub fn positive_transfer_grid<T: Scalar>(
    m: usize,
    n_list: &[usize],
    angles_deg: &[f64],
    seeds: &[u64],
) -> Result<Vec<TransferPoint>> {
    let mut out = Vec::new();
    for &angle in angles_deg {
        for &n in n_list {
            for &seed in seeds {
                out.push(positive_transfer_point::<T>(
                    m,
                    n,
                    n,
                    angle.to_radians(),
                    seed,
                )?);
            }
        }
    }
    Ok(out)
}

pub fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// CSV rendering of the grid (`angle_deg,n,seed,sin_error`).
pub fn transfer_csv(points: &[TransferPoint]) -> String {
    let mut csv = String::from("angle_deg,n,seed,sin_error\n");
    for p in points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.angle_deg,
            p.n,
            p.seed,
            crate::eval::sig6(p.sin_error)
        ));
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_tasks_error_shrinks_with_samples() {
        let seeds: Vec<u64> = (0..6).collect();
        let small: Vec<f64> = seeds
            .iter()
            .map(|&s| {
                positive_transfer_point::<f64>(16, 8, 8, 0.0, s)
                    .unwrap()
                    .sin_error
            })
            .collect();
        let large: Vec<f64> = seeds
            .iter()
            .map(|&s| {
                positive_transfer_point::<f64>(16, 128, 128, 0.0, s)
                    .unwrap()
                    .sin_error
            })
            .collect();
        let med_small = median(&mut small.clone().to_vec());
        let med_large = median(&mut large.clone().to_vec());
        assert!(
            med_large < med_small / 3.0,
            "large-n error {med_large} not well below small-n {med_small}"
        );
    }

    #[test]
    fn orthogonal_tasks_keep_large_error() {
        let mut errors: Vec<f64> = (0..6)
            .map(|s| {
                positive_transfer_point::<f64>(16, 128, 128, std::f64::consts::FRAC_PI_2, s)
                    .unwrap()
                    .sin_error
            })
            .collect();
        let med = median(&mut errors);
        assert!(med > 0.45, "orthogonal-task error {med} collapsed");
    }

    #[test]
    fn sin_is_zero_for_parallel_vectors() {
        let a = Matrix::from_rows(&[&[2.0], &[0.0]]);
        let b = Matrix::from_rows(&[&[1.0], &[0.0]]);
        assert!(sin_between(&a, &b) < 1e-12);
        let c = Matrix::from_rows(&[&[0.0], &[1.0]]);
        assert!((sin_between(&a, &c) - 1.0).abs() < 1e-12);
    }
}
