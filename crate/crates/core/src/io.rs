//! Versioned on-disk formats.
//!
//! * Datasets: JSON `{format: "logbarrier-dataset", version, setup, d, n,
//!   weights, samples}`. Classical samples are length-`d` arrays; quantum
//!   samples are `2d²` doubles, row-major with real and imaginary parts
//!   interleaved.
//! * Tomography instances: the quantum dataset object plus `counts` and an
//!   optional `rho_true` in the same interleaved layout
//!   (`format: "logbarrier-qst"`).
//! * Poisson instances: one JSON header line
//!   `{format: "logbarrier-pip", version, n, d, has_lambda}` followed by
//!   little-endian binary arrays: `b` (`n·d` f64, row-major), `y` (`n` u64),
//!   then `λ` (`d` f64) when present.
//! * Permanent instances: JSON `{format: "logbarrier-permanent", version, d, a}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::QstInstance;
use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianMatrix};
use crate::logloss::Dataset;
use crate::problems::{PermanentInstance, PoissonInstance};
use crate::setup::{Quantum, Setup};

pub const FORMAT_VERSION: u32 = 1;
const DATASET_FORMAT: &str = "logbarrier-dataset";
const QST_FORMAT: &str = "logbarrier-qst";
const PIP_FORMAT: &str = "logbarrier-pip";
const PERMANENT_FORMAT: &str = "logbarrier-permanent";

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DatasetBody {
    setup: String,
    d: usize,
    n: usize,
    weights: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: DatasetBody,
}

#[derive(Serialize, Deserialize)]
struct QstFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: DatasetBody,
    counts: Vec<u64>,
    rho_true: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PipHeader {
    format: String,
    version: u32,
    n: usize,
    d: usize,
    has_lambda: bool,
}

#[derive(Serialize, Deserialize)]
struct PermanentFile {
    format: String,
    version: u32,
    d: usize,
    a: Vec<f64>,
}

fn check_format(found: &str, version: u32, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Format(format!("expected format {expected:?}, found {found:?}")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported {expected} version {version}")));
    }
    Ok(())
}

fn body_of<S: Setup>(ds: &Dataset<S>) -> DatasetBody {
    DatasetBody {
        setup: S::NAME.to_string(),
        d: ds.dim(),
        n: ds.len(),
        weights: ds.weights().to_vec(),
        samples: ds.samples().iter().map(S::sample_to_flat).collect(),
    }
}

fn samples_of<S: Setup>(body: &DatasetBody) -> Result<Vec<S::Sample>> {
    if body.setup != S::NAME {
        return Err(Error::Format(format!(
            "expected a {} dataset, found {:?}",
            S::NAME,
            body.setup
        )));
    }
    if body.samples.len() != body.n || body.weights.len() != body.n {
        return Err(Error::Format(format!(
            "header says n = {} but found {} samples and {} weights",
            body.n,
            body.samples.len(),
            body.weights.len()
        )));
    }
    body.samples.iter().map(|s| S::sample_from_flat(body.d, s)).collect()
}

pub fn dataset_to_json<S: Setup>(ds: &Dataset<S>) -> String {
    let file = DatasetFile {
        format: DATASET_FORMAT.into(),
        version: FORMAT_VERSION,
        body: body_of(ds),
    };
    serde_json::to_string(&file).expect("dataset serializes")
}

pub fn dataset_from_json<S: Setup>(text: &str) -> Result<Dataset<S>> {
    let file: DatasetFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    check_format(&file.format, file.version, DATASET_FORMAT)?;
    Dataset::new(samples_of::<S>(&file.body)?, file.body.weights)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_dataset<S: Setup>(ds: &Dataset<S>, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &dataset_to_json(ds))
}

pub fn read_dataset<S: Setup>(path: impl AsRef<Path>) -> Result<Dataset<S>> {
    dataset_from_json(&read_text(path.as_ref())?)
}

pub fn write_qst_instance(inst: &QstInstance, path: impl AsRef<Path>) -> Result<()> {
    let ds = crate::problems::qst_dataset(inst)?;
    let file = QstFile {
        format: QST_FORMAT.into(),
        version: FORMAT_VERSION,
        body: body_of(&ds),
        counts: inst.counts.clone(),
        rho_true: inst.rho_true.as_ref().map(|r| r.as_hermitian().to_interleaved()),
    };
    write_text(
        path.as_ref(),
        &serde_json::to_string(&file).expect("instance serializes"),
    )
}

pub fn read_qst_instance(path: impl AsRef<Path>) -> Result<QstInstance> {
    let file: QstFile = serde_json::from_str(&read_text(path.as_ref())?).map_err(|e| Error::Format(e.to_string()))?;
    check_format(&file.format, file.version, QST_FORMAT)?;
    let operators = samples_of::<Quantum>(&file.body)?;
    if file.counts.len() != operators.len() {
        return Err(Error::Format(format!(
            "{} operators but {} counts",
            operators.len(),
            file.counts.len()
        )));
    }
    let rho_true = file
        .rho_true
        .map(|flat| DensityMatrix::new(HermitianMatrix::from_interleaved(file.body.d, &flat)?))
        .transpose()?;
    Ok(QstInstance {
        operators,
        counts: file.counts,
        rho_true,
    })
}

pub fn write_poisson_instance(p: &PoissonInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let header = PipHeader {
        format: PIP_FORMAT.into(),
        version: FORMAT_VERSION,
        n: p.len(),
        d: p.dim(),
        has_lambda: p.lambda_true.is_some(),
    };
    let mut line = serde_json::to_string(&header).expect("header serializes");
    line.push('\n');
    w.write_all(line.as_bytes()).map_err(io)?;
    for row in &p.b {
        for v in row {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    for y in &p.y {
        w.write_all(&y.to_le_bytes()).map_err(io)?;
    }
    if let Some(l) = &p.lambda_true {
        for v in l {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_poisson_instance(path: impl AsRef<Path>) -> Result<PoissonInstance> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut line = String::new();
    r.read_line(&mut line).map_err(io)?;
    let h: PipHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
    check_format(&h.format, h.version, PIP_FORMAT)?;
    let mut buf = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("{}: truncated binary payload ({e})", path.display())))?;
        Ok(buf)
    };
    let mut b = Vec::with_capacity(h.n);
    for _ in 0..h.n {
        let row = (0..h.d)
            .map(|_| next(&mut r).map(f64::from_le_bytes))
            .collect::<Result<Vec<_>>>()?;
        b.push(row);
    }
    let y = (0..h.n)
        .map(|_| next(&mut r).map(u64::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    let lambda = if h.has_lambda {
        Some(
            (0..h.d)
                .map(|_| next(&mut r).map(f64::from_le_bytes))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(io)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after payload", rest.len())));
    }
    PoissonInstance::new(b, y, lambda)
}

pub fn write_permanent_instance(p: &PermanentInstance, path: impl AsRef<Path>) -> Result<()> {
    let file = PermanentFile {
        format: PERMANENT_FORMAT.into(),
        version: FORMAT_VERSION,
        d: p.dim(),
        a: p.a.to_interleaved(),
    };
    write_text(
        path.as_ref(),
        &serde_json::to_string(&file).expect("instance serializes"),
    )
}

pub fn read_permanent_instance(path: impl AsRef<Path>) -> Result<PermanentInstance> {
    let file: PermanentFile =
        serde_json::from_str(&read_text(path.as_ref())?).map_err(|e| Error::Format(e.to_string()))?;
    check_format(&file.format, file.version, PERMANENT_FORMAT)?;
    PermanentInstance::new(HermitianMatrix::from_interleaved(file.d, &file.a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{random_measurements, sample_outcomes, w_state};
    use crate::hermitian::test_util::random_psd;
    use crate::logloss::{ClassicalDataset, QuantumDataset};
    use crate::rng::RngStream;
    use crate::setup::Classical;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("logbarrier-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn classical_dataset_round_trip() {
        let ds = ClassicalDataset::new(vec![vec![0.1, 2.0], vec![1e-300, 3.5]], vec![0.3, 0.7]).unwrap();
        let back: ClassicalDataset = dataset_from_json(&dataset_to_json(&ds)).unwrap();
        assert_eq!(back.samples(), ds.samples());
        assert_eq!(back.weights(), ds.weights());
        assert!(dataset_from_json::<Quantum>(&dataset_to_json(&ds)).is_err());
    }

    #[test]
    fn quantum_dataset_round_trip() {
        let mut rng = RngStream::new(1);
        let ds = QuantumDataset::uniform((0..4).map(|_| random_psd(3, 2, &mut rng)).collect()).unwrap();
        let path = tmp("q.json");
        write_dataset(&ds, &path).unwrap();
        let back: QuantumDataset = read_dataset(&path).unwrap();
        for (a, b) in ds.samples().iter().zip(back.samples()) {
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn qst_round_trip() {
        let mut rng = RngStream::new(2);
        let ens = random_measurements(4, 2, 6, &mut rng).unwrap();
        let inst = sample_outcomes(&w_state(2).unwrap(), &ens, 500, &mut rng).unwrap();
        let path = tmp("qst.json");
        write_qst_instance(&inst, &path).unwrap();
        let back = read_qst_instance(&path).unwrap();
        assert_eq!(back.counts, inst.counts);
        assert_eq!(back.operators.len(), inst.operators.len());
        assert_eq!(back.rho_true.unwrap().matrix(), inst.rho_true.unwrap().matrix());
    }

    #[test]
    fn pip_round_trip() {
        let p = PoissonInstance::new(
            vec![vec![0.5, 0.25], vec![0.0, 1.0 / 3.0]],
            vec![4, u64::MAX],
            Some(vec![1.5, 2.0]),
        )
        .unwrap();
        let path = tmp("pip.bin");
        write_poisson_instance(&p, &path).unwrap();
        let back = read_poisson_instance(&path).unwrap();
        assert_eq!(back.b, p.b);
        assert_eq!(back.y, p.y);
        assert_eq!(back.lambda_true, p.lambda_true);

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_poisson_instance(&path), Err(Error::Format(_))));
    }

    #[test]
    fn permanent_round_trip() {
        let mut rng = RngStream::new(3);
        let p = PermanentInstance::new(random_psd(3, 3, &mut rng)).unwrap();
        let path = tmp("perm.json");
        write_permanent_instance(&p, &path).unwrap();
        assert_eq!(read_permanent_instance(&path).unwrap().a.matrix(), p.a.matrix());
    }

    #[test]
    fn wrong_format_and_missing_file() {
        let path = tmp("bad.json");
        std::fs::write(&path, r#"{"format":"other","version":1}"#).unwrap();
        assert!(read_dataset::<Classical>(&path).is_err());
        let err = read_dataset::<Classical>(tmp("missing.json")).unwrap_err();
        assert!(err.to_string().contains("missing.json"));
    }
}
