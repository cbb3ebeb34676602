//! Reading symbol estimates out of solved programs.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::model::make_symbol_set;
use crate::scalar::Real;
use crate::sdr::program::{BlockValue, ConicProgram, SdrKind};

/// Threshold of the tightness decision rule on `‖x̂ − x*‖_∞`.
pub const TIGHT_TOL: f64 = 1e-4;

/// CSDR/ESDR-X read `x` directly, ESDR-Y reads `y = [Re x; Im x]`, and the
/// T-models map the weights through the constellation.
pub fn extract_xhat<T: Real>(u: &[T], program: &ConicProgram<T>) -> Result<Vec<Complex<T>>> {
    program.check_len(u)?;
    let meta = &program.metadata;
    let n = meta.n;
    match meta.sdr_kind {
        SdrKind::Csdr | SdrKind::EsdrX => {
            if meta.x_re.len() != n || meta.x_im.len() != n {
                return invalid("program metadata lacks the x map");
            }
            Ok((0..n).map(|i| Complex::new(program.read(u, meta.x_re[i]), program.read(u, meta.x_im[i]))).collect())
        }
        SdrKind::EsdrY => {
            if meta.y.len() != 2 * n {
                return invalid("program metadata lacks the y map");
            }
            Ok((0..n).map(|i| Complex::new(program.read(u, meta.y[i]), program.read(u, meta.y[n + i]))).collect())
        }
        SdrKind::Esdr1T | SdrKind::Esdr2T => {
            let mm = meta.order;
            if meta.t.len() != n * mm {
                return invalid("program metadata lacks the t map");
            }
            let symbols = make_symbol_set::<T>(mm)?;
            Ok((0..n)
                .map(|i| {
                    (0..mm).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                        acc + symbols.get(j) * program.read(u, meta.t[i * mm + j])
                    })
                })
                .collect())
        }
    }
}

pub fn extract_xhat_from_blocks<T: Real>(blocks: &[BlockValue<T>], program: &ConicProgram<T>) -> Result<Vec<Complex<T>>> {
    extract_xhat(&program.pack(blocks)?, program)
}

/// `max_i |x̂_i − x*_i|`.
pub fn tightness_margin<T: Real>(xhat: &[Complex<T>], xstar: &[Complex<T>]) -> T {
    xhat.iter().zip(xstar).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
}

/// `‖x̂ − x*‖_∞ ≤ 1e-4`.
pub fn decide_tight<T: Real>(xhat: &[Complex<T>], xstar: &[Complex<T>]) -> bool {
    xhat.len() == xstar.len() && tightness_margin(xhat, xstar) <= T::lit(TIGHT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_problem, MimoInstance};
    use crate::sdr::builders::{build, vertex_point};

    type C = Complex<f64>;

    #[test]
    fn decision_rule() {
        let x = vec![C::new(1.0, 0.0), C::new(0.0, -1.0)];
        assert!(decide_tight(&x, &x));
        let mut y = x.clone();
        y[1].re += 1e-3;
        assert!(!decide_tight(&y, &x));
        y[1].re = 5e-5;
        assert!(decide_tight(&y, &x));
    }

    #[test]
    fn vertex_points_extract_to_ground_truth() {
        let h = vec![C::new(1.0, 0.5), C::new(-0.3, 0.2), C::new(0.7, -1.0), C::new(0.1, 0.9)];
        let inst = MimoInstance::new(2, 2, 8, h, vec![C::new(0.05, -0.02); 2], vec![3, 6], 20.0).unwrap();
        let pd = derive_problem(&inst);
        for kind in SdrKind::ALL {
            let p = build(kind, &pd, &inst);
            let u = vertex_point(&p, &pd, &inst.ustar).unwrap();
            let x = extract_xhat(&u, &p).unwrap();
            assert!(tightness_margin(&x, &inst.xstar) < 1e-14, "{kind}");
        }
    }

    #[test]
    fn esdr_y_reads_y() {
        let inst = MimoInstance::new(1, 1, 4, vec![C::new(1.0, 0.0)], vec![C::new(0.0, 0.0)], vec![0], 10.0).unwrap();
        let pd = derive_problem(&inst);
        let p = build(SdrKind::EsdrY, &pd, &inst);
        let u = vertex_point(&p, &pd, &[0]).unwrap();
        assert!(tightness_margin(&extract_xhat(&u, &p).unwrap(), &[C::new(1.0, 0.0)]) < 1e-15);
        assert!(extract_xhat(&u[1..], &p).is_err());
    }
}
