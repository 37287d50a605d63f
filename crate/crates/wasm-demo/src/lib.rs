//! Browser bindings for three small experiments: Poisson phantom
//! reconstruction, LB-SDA vs iMLE on W-state tomography, and the barrier
//! subproblem on the simplex. Each call runs synchronously and returns plain
//! number arrays.

use wasm_bindgen::prelude::*;

use logbarrier::barrier::{barrier_argmin_classical, NewtonOptions};
use logbarrier::geometry::fidelity;
use logbarrier::harness::{generate_instance, run_on_instance, Algo, ExperimentConfig, FinalPoint, Instance, Problem};
use logbarrier::problems::{pip_to_classical, recover_lambda};
use logbarrier::{Budget, CheckpointSchedule, Error, RunRecord};

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn config(problem: Problem, d: usize, n: u64, batch_size: usize, epochs: f64, seed: u32) -> ExperimentConfig {
    ExperimentConfig {
        preset: None,
        problem,
        algo: Algo::Lbsda,
        d,
        n,
        batch_size,
        seed: seed.into(),
        data_seed: seed.into(),
        budget: Budget::Epochs(epochs),
        checkpoints: CheckpointSchedule::Geometric { ratio: 1.15 },
        groups: None,
        input: None,
        out: None,
    }
}

fn columns(r: &RunRecord) -> (Vec<f64>, Vec<f64>) {
    r.checkpoints
        .iter()
        .map(|c| (c.epochs, c.metric.unwrap_or(f64::NAN)))
        .unzip()
}

#[wasm_bindgen]
pub struct Reconstruction {
    side: usize,
    truth: Vec<f64>,
    estimate: Vec<f64>,
    lbsda_epochs: Vec<f64>,
    lbsda_nee: Vec<f64>,
    em_epochs: Vec<f64>,
    em_nee: Vec<f64>,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }
    /// Phantom intensities, row-major.
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    /// Final LB-SDA reconstruction, row-major.
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }
    #[wasm_bindgen(getter, js_name = lbsdaEpochs)]
    pub fn lbsda_epochs(&self) -> Vec<f64> {
        self.lbsda_epochs.clone()
    }
    #[wasm_bindgen(getter, js_name = lbsdaNee)]
    pub fn lbsda_nee(&self) -> Vec<f64> {
        self.lbsda_nee.clone()
    }
    #[wasm_bindgen(getter, js_name = emEpochs)]
    pub fn em_epochs(&self) -> Vec<f64> {
        self.em_epochs.clone()
    }
    #[wasm_bindgen(getter, js_name = emNee)]
    pub fn em_nee(&self) -> Vec<f64> {
        self.em_nee.clone()
    }
}

/// 1-sample LB-SDA and EM on a `side × side` phantom observed through `n`
/// Bernoulli sensing vectors.
pub fn reconstruct(side: usize, n: u32, epochs: f64, seed: u32) -> logbarrier::Result<Reconstruction> {
    let cfg = config(Problem::Pip, side * side, n.into(), 1, epochs, seed);
    let inst = generate_instance(&cfg)?;
    let Instance::Pip(pip) = &inst else {
        unreachable!("pip config")
    };
    let (_, ctx) = pip_to_classical(pip)?;
    let lb = run_on_instance(&cfg, &inst)?;
    let em = run_on_instance(&ExperimentConfig { algo: Algo::Em, ..cfg }, &inst)?;
    let FinalPoint::Simplex(x) = &lb.final_point else {
        unreachable!("classical run")
    };
    let (lbsda_epochs, lbsda_nee) = columns(&lb.record);
    let (em_epochs, em_nee) = columns(&em.record);
    Ok(Reconstruction {
        side,
        truth: pip.lambda_true.clone().unwrap_or_default(),
        estimate: recover_lambda(x, &ctx)?,
        lbsda_epochs,
        lbsda_nee,
        em_epochs,
        em_nee,
    })
}

#[wasm_bindgen(js_name = reconstructPhantom)]
pub fn reconstruct_phantom(side: usize, n: u32, epochs: f64, seed: u32) -> Result<Reconstruction, JsError> {
    reconstruct(side, n, epochs, seed).map_err(js)
}

#[wasm_bindgen]
pub struct Race {
    lbsda_epochs: Vec<f64>,
    lbsda_fidelity: Vec<f64>,
    imle_epochs: Vec<f64>,
    imle_fidelity: Vec<f64>,
    mutual: f64,
}

#[wasm_bindgen]
impl Race {
    #[wasm_bindgen(getter, js_name = lbsdaEpochs)]
    pub fn lbsda_epochs(&self) -> Vec<f64> {
        self.lbsda_epochs.clone()
    }
    #[wasm_bindgen(getter, js_name = lbsdaFidelity)]
    pub fn lbsda_fidelity(&self) -> Vec<f64> {
        self.lbsda_fidelity.clone()
    }
    #[wasm_bindgen(getter, js_name = imleEpochs)]
    pub fn imle_epochs(&self) -> Vec<f64> {
        self.imle_epochs.clone()
    }
    #[wasm_bindgen(getter, js_name = imleFidelity)]
    pub fn imle_fidelity(&self) -> Vec<f64> {
        self.imle_fidelity.clone()
    }
    /// Fidelity between the two final estimates.
    #[wasm_bindgen(getter)]
    pub fn mutual(&self) -> f64 {
        self.mutual
    }
}

/// d-sample LB-SDA and iMLE on `shots` outcomes of the `qubits`-qubit W state.
pub fn race(qubits: u32, shots: u32, groups: usize, epochs: f64, seed: u32) -> logbarrier::Result<Race> {
    if !(2..=5).contains(&qubits) {
        return Err(Error::Config(format!("the demo supports 2 to 5 qubits, got {qubits}")));
    }
    let d = 1usize << qubits;
    let cfg = ExperimentConfig {
        groups: Some(groups),
        ..config(Problem::Qst, d, shots.into(), d, epochs, seed)
    };
    let inst = generate_instance(&cfg)?;
    let lb = run_on_instance(&cfg, &inst)?;
    let im = run_on_instance(
        &ExperimentConfig {
            algo: Algo::Imle,
            ..cfg
        },
        &inst,
    )?;
    let (FinalPoint::Density(a), FinalPoint::Density(b)) = (&lb.final_point, &im.final_point) else {
        unreachable!("quantum runs")
    };
    let (lbsda_epochs, lbsda_fidelity) = columns(&lb.record);
    let (imle_epochs, imle_fidelity) = columns(&im.record);
    Ok(Race {
        lbsda_epochs,
        lbsda_fidelity,
        imle_epochs,
        imle_fidelity,
        mutual: fidelity(a, b)?,
    })
}

#[wasm_bindgen(js_name = tomographyRace)]
pub fn tomography_race(qubits: u32, shots: u32, groups: usize, epochs: f64, seed: u32) -> Result<Race, JsError> {
    race(qubits, shots, groups, epochs, seed).map_err(js)
}

/// `argmin_{x ∈ Δ} η⟨g, x⟩ − Σ log x_j`.
pub fn barrier_argmin(g: &[f64], eta: f64) -> logbarrier::Result<Vec<f64>> {
    let (x, _) = barrier_argmin_classical(g, eta, &NewtonOptions::default())?;
    Ok(x.as_slice().to_vec())
}

#[wasm_bindgen(js_name = barrierPoint)]
pub fn barrier_point(g: &[f64], eta: f64) -> Result<Vec<f64>, JsError> {
    barrier_argmin(g, eta).map_err(js)
}
