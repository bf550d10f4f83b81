//! Linear-optical mode unitaries.
//!
//! A `ModeUnitary` is a k×k matrix U acting on k selected modes in the
//! Heisenberg picture, `a_i† → Σ_j U_ji a_j†`, i.e. column i holds the image
//! of input mode i over the output modes.

use nalgebra::DMatrix;

use crate::error::{SimError, SimResult};
use crate::fock::layout::{ModeIndex, ModeLayout, Polarization};
use crate::C64;

const UNITARITY_TOL: f64 = 1e-10;

/// A unitary transformation of a subset of modes.
#[derive(Clone, Debug)]
pub struct ModeUnitary {
    matrix: DMatrix<C64>,
    targets: Vec<ModeIndex>,
}

impl ModeUnitary {
    /// Validates shape, target distinctness and unitarity (‖U†U − I‖∞ ≤ 1e-10).
    pub fn new(matrix: DMatrix<C64>, targets: Vec<ModeIndex>) -> SimResult<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SimError::InvalidParameter("mode unitary must be square".into()));
        }
        if matrix.nrows() != targets.len() {
            return Err(SimError::InvalidParameter(format!(
                "unitary of size {} applied to {} target modes",
                matrix.nrows(),
                targets.len()
            )));
        }
        for (i, a) in targets.iter().enumerate() {
            for b in targets.iter().skip(i + 1) {
                if a == b {
                    return Err(SimError::InvalidParameter(format!(
                        "duplicate target mode index {}",
                        a.index()
                    )));
                }
            }
        }
        let k = matrix.nrows();
        let mut deviation = 0.0f64;
        for r in 0..k {
            for c in 0..k {
                let mut dot = C64::new(0.0, 0.0);
                for j in 0..k {
                    dot += matrix[(j, r)].conj() * matrix[(j, c)];
                }
                let expected = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                deviation = deviation.max((dot - expected).norm());
            }
        }
        if deviation > UNITARITY_TOL {
            return Err(SimError::NotUnitary { deviation });
        }
        Ok(ModeUnitary { matrix, targets })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn targets(&self) -> &[ModeIndex] {
        &self.targets
    }
}

fn two_mode(elems: [[C64; 2]; 2], m0: ModeIndex, m1: ModeIndex) -> SimResult<ModeUnitary> {
    let matrix = DMatrix::from_row_slice(
        2,
        2,
        &[elems[0][0], elems[0][1], elems[1][0], elems[1][1]],
    );
    ModeUnitary::new(matrix, vec![m0, m1])
}

/// Beam splitter with power reflectivity `r`:
///
/// ```text
/// ( √r   √(1−r) )
/// ( √(1−r)  −√r )
/// ```
///
/// A balanced splitter (`r = 0.5`) sends |1,1⟩ to (|2,0⟩ − |0,2⟩)/√2.
pub fn beam_splitter(reflectivity: f64, m0: ModeIndex, m1: ModeIndex) -> SimResult<ModeUnitary> {
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(SimError::InvalidParameter(format!(
            "beam splitter reflectivity {reflectivity} outside [0, 1]"
        )));
    }
    let sr = reflectivity.sqrt();
    let st = (1.0 - reflectivity).sqrt();
    let re = |x: f64| C64::new(x, 0.0);
    two_mode([[re(sr), re(st)], [re(st), re(-sr)]], m0, m1)
}

/// Half-wave plate at angle θ on an (H, V) mode pair:
///
/// ```text
/// ( cos 2θ   sin 2θ )
/// ( sin 2θ  −cos 2θ )
/// ```
pub fn hwp(theta: f64, h: ModeIndex, v: ModeIndex) -> SimResult<ModeUnitary> {
    let c = (2.0 * theta).cos();
    let s = (2.0 * theta).sin();
    let re = |x: f64| C64::new(x, 0.0);
    two_mode([[re(c), re(s)], [re(s), re(-c)]], h, v)
}

/// Quarter-wave plate at angle θ on an (H, V) mode pair:
/// R(θ)·diag(1, i)·R(−θ) with R the rotation by θ.
pub fn qwp(theta: f64, h: ModeIndex, v: ModeIndex) -> SimResult<ModeUnitary> {
    let c = theta.cos();
    let s = theta.sin();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let a = one * c * c + i * s * s;
    let b = (one - i) * s * c;
    let d = one * s * s + i * c * c;
    two_mode([[a, b], [b, d]], h, v)
}

/// General polarization preparation sending an H photon to α|H⟩ + β|V⟩:
///
/// ```text
/// ( α  −β̄ )
/// ( β   ᾱ )
/// ```
pub fn polarization_prep(
    alpha: C64,
    beta: C64,
    h: ModeIndex,
    v: ModeIndex,
) -> SimResult<ModeUnitary> {
    if (alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(SimError::InvalidParameter(
            "preparation amplitudes must satisfy |α|² + |β|² = 1".into(),
        ));
    }
    two_mode([[alpha, -beta.conj()], [beta, alpha.conj()]], h, v)
}

/// Beam splitter between two dual-rail spatial modes: one two-mode splitter
/// per polarization, returned in application order.
pub fn beam_splitter_spatial(
    layout: &ModeLayout,
    reflectivity: f64,
    s0: &str,
    s1: &str,
) -> SimResult<Vec<ModeUnitary>> {
    let mut out = Vec::with_capacity(2);
    for pol in [Polarization::H, Polarization::V] {
        let a = layout.mode(s0, pol)?;
        let b = layout.mode(s1, pol)?;
        out.push(beam_splitter(reflectivity, a, b)?);
    }
    Ok(out)
}

/// Half-wave plate acting on one dual-rail spatial mode.
pub fn hwp_on(layout: &ModeLayout, theta: f64, spatial: &str) -> SimResult<ModeUnitary> {
    let h = layout.mode(spatial, Polarization::H)?;
    let v = layout.mode(spatial, Polarization::V)?;
    hwp(theta, h, v)
}

/// Quarter-wave plate acting on one dual-rail spatial mode.
pub fn qwp_on(layout: &ModeLayout, theta: f64, spatial: &str) -> SimResult<ModeUnitary> {
    let h = layout.mode(spatial, Polarization::H)?;
    let v = layout.mode(spatial, Polarization::V)?;
    qwp(theta, h, v)
}
