//! JSON form of a [`Scenario`]:
//!
//! ```json
//! {"dc": {"axis": [x, y, z], "angle": radians}}
//! {"dc_matrix": [[[re, im], [re, im]], [[re, im], [re, im]]]}
//! {"cc_bell_diagonal": [p_phi_plus, p_phi_minus, p_psi_plus, p_psi_minus]}
//! {"cc_matrix": [[[re, im], ...4], ...4 rows]}
//! ```
//!
//! Matrices may also be given as a flat row-major list of `[re, im]` entries.

use nalgebra::{Matrix2, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::{bell_diagonal, Scenario, TwoQubitState};
use crate::error::{Error, Result};
use crate::linalg::{axis_angle_from_rotation, rotation_from_unitary, unitary_from_axis_angle, AxisAngle, BlochVector, Mat2, Mat4, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntries {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixEntries {
    fn flatten(&self, dim: usize) -> Result<Vec<C64>> {
        let flat: Vec<[f64; 2]> = match self {
            MatrixEntries::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Scenario(format!("expected {dim}×{dim} matrix rows")));
                }
                rows.iter().flatten().copied().collect()
            }
            MatrixEntries::Flat(v) => v.clone(),
        };
        if flat.len() != dim * dim {
            return Err(Error::Scenario(format!(
                "expected {} entries for a {dim}×{dim} matrix, got {}",
                dim * dim,
                flat.len()
            )));
        }
        Ok(flat.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        MatrixEntries::Rows((0..2).map(|i| (0..2).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn from_mat4(m: &Mat4) -> Self {
        MatrixEntries::Rows((0..4).map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_mat2(&self) -> Result<Mat2> {
        Ok(Matrix2::from_row_slice(&self.flatten(2)?))
    }

    pub fn to_mat4(&self) -> Result<Mat4> {
        Ok(Matrix4::from_row_slice(&self.flatten(4)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSpec {
    Dc { axis: [f64; 3], angle: f64 },
    DcMatrix(MatrixEntries),
    CcBellDiagonal([f64; 4]),
    CcMatrix(MatrixEntries),
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario specs always serialize")
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        match self {
            ScenarioSpec::Dc { axis, angle } => {
                let axis = BlochVector::new(Vector3::from(*axis))
                    .map_err(|e| Error::Scenario(format!("dc axis: {e}")))?;
                let aa = AxisAngle::wrapped(axis, *angle)?;
                Scenario::direct_cause(unitary_from_axis_angle(&aa))
            }
            ScenarioSpec::DcMatrix(m) => Scenario::direct_cause(m.to_mat2()?),
            ScenarioSpec::CcBellDiagonal(w) => Ok(Scenario::common_cause(bell_diagonal(*w)?)),
            ScenarioSpec::CcMatrix(m) => Ok(Scenario::common_cause(TwoQubitState::new(m.to_mat4()?)?)),
        }
    }
}

impl Scenario {
    /// Canonical JSON form: axis-angle for channels (exact up to a global
    /// phase), full density matrix for states.
    pub fn to_spec(&self) -> ScenarioSpec {
        match self {
            Scenario::DirectCause(ch) => {
                let r = rotation_from_unitary(ch.unitary()).expect("validated unitary");
                let aa = axis_angle_from_rotation(&r);
                ScenarioSpec::Dc {
                    axis: aa.axis.to_array(),
                    angle: aa.angle,
                }
            }
            Scenario::CommonCause(state) => ScenarioSpec::CcMatrix(MatrixEntries::from_mat4(state.matrix())),
        }
    }
}
