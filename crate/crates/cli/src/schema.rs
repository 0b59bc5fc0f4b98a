//! JSON wire formats for the core types: matrices as row-major [re, im]
//! pairs, layouts as arrays of dims, plus the scheme and circuit schemas the
//! CLI consumes and produces.

use base64::Engine;
use serde::{Deserialize, Serialize};

use qclab_core::commit::Commitment;
use qclab_core::dqre::{Encoding, Gate, Label, ProgramCircuit};
use qclab_core::owsg::OwsgScheme;
use qclab_core::qmath::types::{DensityMatrix, UnitaryOp};
use qclab_core::qmath::{ComplexMatrix, RegisterLayout, C64};

#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn err(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

/// Dense complex matrix: row-major entries as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, SchemaError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(err("matrix entry count does not match dimensions"));
        }
        let entries = self
            .entries
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        Ok(ComplexMatrix::from_entries(self.rows, self.cols, entries))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommitmentJson {
    pub layout: Vec<usize>,
    pub commit_subsystems: Vec<usize>,
    pub reveal_subsystems: Vec<usize>,
    pub q0: MatrixJson,
    pub q1: MatrixJson,
}

impl CommitmentJson {
    pub fn from_commitment(c: &Commitment) -> Self {
        CommitmentJson {
            layout: c.layout().dims().to_vec(),
            commit_subsystems: c.commit_subsystems().to_vec(),
            reveal_subsystems: c.reveal_subsystems().to_vec(),
            q0: MatrixJson::from_matrix(c.q(false).matrix()),
            q1: MatrixJson::from_matrix(c.q(true).matrix()),
        }
    }

    pub fn to_commitment(&self) -> Result<Commitment, SchemaError> {
        let layout = RegisterLayout::new(self.layout.clone())
            .map_err(|e| err(format!("layout: {e}")))?;
        let q0 = UnitaryOp::new(layout.clone(), self.q0.to_matrix()?)
            .map_err(|e| err(format!("q0: {e}")))?;
        let q1 = UnitaryOp::new(layout, self.q1.to_matrix()?)
            .map_err(|e| err(format!("q1: {e}")))?;
        Commitment::new(
            q0,
            q1,
            self.commit_subsystems.clone(),
            self.reveal_subsystems.clone(),
        )
        .map_err(|e| err(format!("commitment: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OwsgSchemeJson {
    pub weights: Vec<f64>,
    pub state_layout: Vec<usize>,
    pub ancilla_qubits: usize,
    pub states: Vec<MatrixJson>,
    pub vrfy_unitaries: Vec<MatrixJson>,
}

impl OwsgSchemeJson {
    pub fn from_scheme(s: &OwsgScheme) -> Self {
        OwsgSchemeJson {
            weights: s.weights().to_vec(),
            state_layout: s.state_layout().dims().to_vec(),
            ancilla_qubits: s.ancilla_qubits(),
            states: (0..s.key_count())
                .map(|k| MatrixJson::from_matrix(s.state(k).matrix()))
                .collect(),
            vrfy_unitaries: (0..s.key_count())
                .map(|k| MatrixJson::from_matrix(s.vrfy_unitary(k).matrix()))
                .collect(),
        }
    }

    pub fn to_scheme(&self) -> Result<OwsgScheme, SchemaError> {
        let state_layout = RegisterLayout::new(self.state_layout.clone())
            .map_err(|e| err(format!("state layout: {e}")))?;
        let mut vrfy_dims = self.state_layout.clone();
        vrfy_dims.extend(std::iter::repeat_n(2, self.ancilla_qubits));
        let vrfy_layout = RegisterLayout::new(vrfy_dims)
            .map_err(|e| err(format!("verifier layout: {e}")))?;
        let states = self
            .states
            .iter()
            .map(|m| {
                DensityMatrix::new(state_layout.clone(), m.to_matrix()?)
                    .map_err(|e| err(format!("state: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let vrfy = self
            .vrfy_unitaries
            .iter()
            .map(|m| {
                UnitaryOp::new(vrfy_layout.clone(), m.to_matrix()?)
                    .map_err(|e| err(format!("verifier: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        OwsgScheme::new(self.weights.clone(), states, vrfy, self.ancilla_qubits)
            .map_err(|e| err(format!("scheme: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "op")]
pub enum GateJson {
    I { wire: usize },
    H { wire: usize },
    T { wire: usize },
    Cnot { control: usize, target: usize },
    Dilated { wires: Vec<usize>, matrix: MatrixJson },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgramCircuitJson {
    pub quantum_wires: usize,
    pub classical_wires: usize,
    pub ancilla_wires: usize,
    pub gates: Vec<GateJson>,
    pub output_wires: Vec<usize>,
}

impl ProgramCircuitJson {
    pub fn from_circuit(c: &ProgramCircuit) -> Self {
        ProgramCircuitJson {
            quantum_wires: c.quantum_wires(),
            classical_wires: c.classical_wires(),
            ancilla_wires: c.ancilla_wires(),
            gates: c
                .gates()
                .iter()
                .map(|g| match g {
                    Gate::I(w) => GateJson::I { wire: *w },
                    Gate::H(w) => GateJson::H { wire: *w },
                    Gate::T(w) => GateJson::T { wire: *w },
                    Gate::Cnot { control, target } => GateJson::Cnot {
                        control: *control,
                        target: *target,
                    },
                    Gate::Dilated { wires, matrix } => GateJson::Dilated {
                        wires: wires.clone(),
                        matrix: MatrixJson::from_matrix(matrix),
                    },
                })
                .collect(),
            output_wires: c.output_wires().to_vec(),
        }
    }

    pub fn to_circuit(&self) -> Result<ProgramCircuit, SchemaError> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(match g {
                    GateJson::I { wire } => Gate::I(*wire),
                    GateJson::H { wire } => Gate::H(*wire),
                    GateJson::T { wire } => Gate::T(*wire),
                    GateJson::Cnot { control, target } => Gate::Cnot {
                        control: *control,
                        target: *target,
                    },
                    GateJson::Dilated { wires, matrix } => Gate::Dilated {
                        wires: wires.clone(),
                        matrix: matrix.to_matrix()?,
                    },
                })
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        ProgramCircuit::new(
            self.quantum_wires,
            self.classical_wires,
            self.ancilla_wires,
            gates,
            self.output_wires.clone(),
        )
        .map_err(|e| err(format!("circuit: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", untagged)]
pub enum LabelJson {
    Classical { bits: Vec<bool> },
    Quantum { state: MatrixJson },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodingJson {
    /// Offline blob, base64.
    pub offline: String,
    pub labels: Vec<LabelJson>,
    pub label_len: usize,
}

impl EncodingJson {
    pub fn from_encoding(e: &Encoding) -> Self {
        EncodingJson {
            offline: base64::engine::general_purpose::STANDARD.encode(&e.offline),
            labels: e
                .labels
                .iter()
                .map(|l| match l {
                    Label::Classical(bits) => LabelJson::Classical { bits: bits.clone() },
                    Label::Quantum(state) => LabelJson::Quantum {
                        state: MatrixJson::from_matrix(state.matrix()),
                    },
                })
                .collect(),
            label_len: e.label_len,
        }
    }

    pub fn to_encoding(&self) -> Result<Encoding, SchemaError> {
        let offline = base64::engine::general_purpose::STANDARD
            .decode(&self.offline)
            .map_err(|e| err(format!("offline blob: {e}")))?;
        let qubit = RegisterLayout::new(vec![2]).expect("within cap");
        let labels = self
            .labels
            .iter()
            .map(|l| {
                Ok(match l {
                    LabelJson::Classical { bits } => Label::Classical(bits.clone()),
                    LabelJson::Quantum { state } => Label::Quantum(
                        DensityMatrix::new(qubit.clone(), state.to_matrix()?)
                            .map_err(|e| err(format!("label state: {e}")))?,
                    ),
                })
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        Ok(Encoding {
            offline,
            labels,
            label_len: self.label_len,
        })
    }
}
