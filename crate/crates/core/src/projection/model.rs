use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Activation, InitScheme, ProjectionError, Result};
use crate::binio::{at_eof, read_f32s, read_str16, write_f32s, write_str16};
use crate::store::ContextRecord;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"CDEM";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Filter matrix `W` (p × q, row-major) plus one length-`p` diagonal per sense.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    p: usize,
    q: usize,
    activation: Activation,
    w: Vec<f64>,
    senses: Vec<String>,
    sense_index: HashMap<String, usize>,
    diagonals: Vec<f64>,
}

/// Intermediate quantities of one record's alignment term.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// `W·c`
    pub projected_context: Vec<f64>,
    /// `f(a ⊙ g)`
    pub predicted_sense: Vec<f64>,
    /// `W·c − f(a ⊙ g)`
    pub residual: Vec<f64>,
}

/// Gradients of the summed squared alignment loss. Senses absent from the batch are
/// absent from `diagonals` (their gradient is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<f64>,
    pub diagonals: BTreeMap<String, Vec<f64>>,
}

impl Gradients {
    /// Gradient for one sense's diagonal, zeros when the sense was not in the batch.
    pub fn diagonal(&self, sense: &str, p: usize) -> Vec<f64> {
        self.diagonals
            .get(sense)
            .cloned()
            .unwrap_or_else(|| vec![0.0; p])
    }
}

/// A record resolved against the model: context vector, sense row and static vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Example<'a> {
    pub context: &'a [f32],
    pub sense: usize,
    pub g: &'a [f32],
}

/// Gradients keyed by sense row, used internally by the optimizer.
#[derive(Debug, Clone)]
pub(crate) struct RawGradients {
    pub loss: f64,
    pub w: Vec<f64>,
    pub diagonals: BTreeMap<usize, Vec<f64>>,
}

impl RawGradients {
    pub fn zeros(p: usize, q: usize) -> Self {
        RawGradients {
            loss: 0.0,
            w: vec![0.0; p * q],
            diagonals: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, other: &RawGradients) {
        self.loss += other.loss;
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            *a += b;
        }
        for (sense, g) in &other.diagonals {
            match self.diagonals.get_mut(sense) {
                Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
                None => {
                    self.diagonals.insert(*sense, g.clone());
                }
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.loss *= factor;
        self.w.iter_mut().for_each(|x| *x *= factor);
        self.diagonals
            .values_mut()
            .flatten()
            .for_each(|x| *x *= factor);
    }
}

fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl ProjectionModel {
    /// Samples a fresh model. `W` is drawn first (row-major), then each diagonal in
    /// `sense_ids` order, all from one ChaCha8 stream seeded with `seed`.
    pub fn init(
        p: usize,
        q: usize,
        sense_ids: &[String],
        scheme: InitScheme,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(ProjectionError::InvalidConfig(
                "p and q must be positive".into(),
            ));
        }
        if sense_ids.is_empty() {
            return Err(ProjectionError::InvalidConfig(
                "at least one sense is required".into(),
            ));
        }
        let mut sense_index = HashMap::with_capacity(sense_ids.len());
        for (i, s) in sense_ids.iter().enumerate() {
            if sense_index.insert(s.clone(), i).is_some() {
                return Err(ProjectionError::DuplicateSense(s.clone()));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w_lo, w_hi, a_lo, a_hi) = match scheme {
            InitScheme::Xavier => {
                let bw = xavier_bound(q, p);
                let ba = xavier_bound(p, p);
                (-bw, bw, -ba, ba)
            }
            InitScheme::Uniform01 => (0.0, 1.0, 0.0, 1.0),
        };
        let w = (0..p * q).map(|_| rng.random_range(w_lo..=w_hi)).collect();
        let diagonals = (0..p * sense_ids.len())
            .map(|_| rng.random_range(a_lo..=a_hi))
            .collect();

        Ok(ProjectionModel {
            p,
            q,
            activation,
            w,
            senses: sense_ids.to_vec(),
            sense_index,
            diagonals,
        })
    }

    /// Builds a model from explicit parameters.
    pub fn from_parts(
        p: usize,
        q: usize,
        activation: Activation,
        w: Vec<f64>,
        diagonals: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(ProjectionError::InvalidConfig(
                "p and q must be positive".into(),
            ));
        }
        if w.len() != p * q {
            return Err(ProjectionError::DimensionMismatch {
                what: "W",
                expected: p * q,
                found: w.len(),
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(ProjectionError::NonFiniteParameter("W".into()));
        }
        let mut model = ProjectionModel {
            p,
            q,
            activation,
            w,
            senses: Vec::with_capacity(diagonals.len()),
            sense_index: HashMap::with_capacity(diagonals.len()),
            diagonals: Vec::with_capacity(diagonals.len() * p),
        };
        for (sense, a) in diagonals {
            if a.len() != p {
                return Err(ProjectionError::DimensionMismatch {
                    what: "diagonal",
                    expected: p,
                    found: a.len(),
                });
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(ProjectionError::NonFiniteParameter(sense));
            }
            if model
                .sense_index
                .insert(sense.clone(), model.senses.len())
                .is_some()
            {
                return Err(ProjectionError::DuplicateSense(sense));
            }
            model.senses.push(sense);
            model.diagonals.extend_from_slice(&a);
        }
        Ok(model)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn set_activation(&mut self, activation: Activation) {
        self.activation = activation;
    }

    /// Row-major `W`.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn w_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn senses(&self) -> &[String] {
        &self.senses
    }

    pub fn has_sense(&self, sense: &str) -> bool {
        self.sense_index.contains_key(sense)
    }

    pub(crate) fn sense_row(&self, sense: &str) -> Option<usize> {
        self.sense_index.get(sense).copied()
    }

    pub fn diagonal(&self, sense: &str) -> Option<&[f64]> {
        self.sense_row(sense).map(|i| self.row(i))
    }

    pub fn diagonal_mut(&mut self, sense: &str) -> Option<&mut [f64]> {
        let i = self.sense_row(sense)?;
        Some(self.row_mut(i))
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.diagonals[i * self.p..(i + 1) * self.p]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.diagonals[i * self.p..(i + 1) * self.p]
    }

    /// Sense-specific static vector `a ⊙ g`. No activation is applied here; `f` only
    /// couples the two spaces during training.
    pub fn project_sense(&self, sense: &str, g: &[f32]) -> Result<Vec<f64>> {
        let a = self
            .diagonal(sense)
            .ok_or_else(|| ProjectionError::UnknownSense(sense.to_string()))?;
        self.check_len("static vector", self.p, g.len())?;
        Ok(a.iter().zip(g).map(|(&a, &g)| a * g as f64).collect())
    }

    fn check_len(&self, what: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected != found {
            return Err(ProjectionError::DimensionMismatch {
                what,
                expected,
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn resolve<'a>(
        &self,
        record: &'a ContextRecord,
        g: &'a [f32],
    ) -> Result<Example<'a>> {
        let sense = record
            .gold_sense
            .as_deref()
            .ok_or_else(|| ProjectionError::MissingGold(record.instance_id.clone()))?;
        let row = self
            .sense_row(sense)
            .ok_or_else(|| ProjectionError::UnknownSense(sense.to_string()))?;
        self.check_len("context vector", self.q, record.vector.len())?;
        self.check_len("static vector", self.p, g.len())?;
        Ok(Example {
            context: &record.vector,
            sense: row,
            g,
        })
    }

    fn resolve_batch<'a>(
        &self,
        batch: &[(&'a ContextRecord, &'a [f32])],
    ) -> Result<Vec<Example<'a>>> {
        if batch.is_empty() {
            return Err(ProjectionError::EmptyBatch);
        }
        batch.iter().map(|(r, g)| self.resolve(r, g)).collect()
    }

    pub(crate) fn forward_example(&self, ex: &Example<'_>) -> Forward {
        let a = self.row(ex.sense);
        let projected_context: Vec<f64> = self
            .w
            .chunks_exact(self.q)
            .map(|row| {
                row.iter()
                    .zip(ex.context)
                    .map(|(&w, &c)| w * c as f64)
                    .sum()
            })
            .collect();
        let predicted_sense: Vec<f64> = a
            .iter()
            .zip(ex.g)
            .map(|(&a, &g)| self.activation.apply(a * g as f64))
            .collect();
        let residual = projected_context
            .iter()
            .zip(&predicted_sense)
            .map(|(x, y)| x - y)
            .collect();
        Forward {
            projected_context,
            predicted_sense,
            residual,
        }
    }

    pub fn forward(&self, record: &ContextRecord, g: &[f32]) -> Result<Forward> {
        let ex = self.resolve(record, g)?;
        Ok(self.forward_example(&ex))
    }

    pub(crate) fn example_loss(&self, ex: &Example<'_>) -> f64 {
        self.forward_example(ex)
            .residual
            .iter()
            .map(|r| r * r)
            .sum()
    }

    /// Summed squared residual norm over the batch.
    pub fn loss(&self, batch: &[(&ContextRecord, &[f32])]) -> Result<f64> {
        let examples = self.resolve_batch(batch)?;
        Ok(examples.iter().map(|ex| self.example_loss(ex)).sum())
    }

    /// Accumulates loss and gradients of the summed loss over `examples` into `acc`.
    pub(crate) fn accumulate(&self, examples: &[Example<'_>], acc: &mut RawGradients) {
        for ex in examples {
            let fwd = self.forward_example(ex);
            acc.loss += fwd.residual.iter().map(|r| r * r).sum::<f64>();
            for (k, &r) in fwd.residual.iter().enumerate() {
                let row = &mut acc.w[k * self.q..(k + 1) * self.q];
                let two_r = 2.0 * r;
                for (gw, &c) in row.iter_mut().zip(ex.context) {
                    *gw += two_r * c as f64;
                }
            }
            let a = self.row(ex.sense);
            let grad_a = acc
                .diagonals
                .entry(ex.sense)
                .or_insert_with(|| vec![0.0; self.p]);
            for k in 0..self.p {
                let g = ex.g[k] as f64;
                let z = a[k] * g;
                grad_a[k] -= 2.0 * fwd.residual[k] * self.activation.derivative(z) * g;
            }
        }
    }

    /// Analytic gradients of the summed loss with respect to `W` and every touched diagonal.
    pub fn gradients(&self, batch: &[(&ContextRecord, &[f32])]) -> Result<Gradients> {
        let examples = self.resolve_batch(batch)?;
        let mut acc = RawGradients::zeros(self.p, self.q);
        self.accumulate(&examples, &mut acc);
        Ok(self.name_gradients(acc))
    }

    pub(crate) fn name_gradients(&self, raw: RawGradients) -> Gradients {
        Gradients {
            w: raw.w,
            diagonals: raw
                .diagonals
                .into_iter()
                .map(|(i, g)| (self.senses[i].clone(), g))
                .collect(),
        }
    }

    /// Serializes the checkpoint: magic, version, p, q, activation, `W` as f32, then
    /// each sense id with its f32 diagonal.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let too_big = |what: &str| io::Error::new(io::ErrorKind::InvalidInput, format!("{what} exceeds u32"));
        w.write_all(&CHECKPOINT_MAGIC)?;
        w.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
        w.write_u32::<LittleEndian>(u32::try_from(self.p).map_err(|_| too_big("p"))?)?;
        w.write_u32::<LittleEndian>(u32::try_from(self.q).map_err(|_| too_big("q"))?)?;
        w.write_u8(self.activation.code())?;
        let w32: Vec<f32> = self.w.iter().map(|&x| x as f32).collect();
        write_f32s(w, &w32)?;
        w.write_u64::<LittleEndian>(self.senses.len() as u64)?;
        for (i, sense) in self.senses.iter().enumerate() {
            write_str16(w, sense)?;
            let a: Vec<f32> = self.row(i).iter().map(|&x| x as f32).collect();
            write_f32s(w, &a)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail for in-range dimensions");
        buf
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let bad = |m: String| ProjectionError::Checkpoint(m);
        let io = |e: io::Error| ProjectionError::Checkpoint(format!("truncated or unreadable: {e}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(bad(format!("bad magic {magic:?}")));
        }
        let version = r.read_u32::<LittleEndian>().map_err(io)?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let p = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let q = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let code = r.read_u8().map_err(io)?;
        let activation =
            Activation::from_code(code).ok_or_else(|| bad(format!("unknown activation code {code}")))?;
        let w: Vec<f64> = read_f32s(r, p * q)
            .map_err(io)?
            .into_iter()
            .map(f64::from)
            .collect();
        let count = r.read_u64::<LittleEndian>().map_err(io)?;
        let mut diagonals = Vec::with_capacity(count.min(1 << 20) as usize);
        for _ in 0..count {
            let id = read_str16(r).map_err(io)?;
            let a = read_f32s(r, p).map_err(io)?.into_iter().map(f64::from).collect();
            diagonals.push((id, a));
        }
        if !at_eof(r).map_err(io)? {
            return Err(bad("trailing bytes after last sense".into()));
        }
        Self::from_parts(p, q, activation, w, diagonals)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| ProjectionError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        self.write_to(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| ProjectionError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::read_from(&mut BufReader::new(file))
    }

    /// SHA-256 of the serialized checkpoint, hex encoded.
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Pos;

    fn rec(sense: &str, c: Vec<f32>) -> ContextRecord {
        ContextRecord {
            instance_id: "i0".into(),
            lemma: "w".into(),
            pos: Pos::Noun,
            gold_sense: Some(sense.into()),
            vector: c,
        }
    }

    fn ids(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn init_is_deterministic() {
        let a = ProjectionModel::init(2, 3, &ids(&["s1"]), InitScheme::Xavier, Activation::Linear, 7)
            .unwrap();
        let b = ProjectionModel::init(2, 3, &ids(&["s1"]), InitScheme::Xavier, Activation::Linear, 7)
            .unwrap();
        assert_eq!(a, b);
        let c = ProjectionModel::init(2, 3, &ids(&["s1"]), InitScheme::Xavier, Activation::Linear, 8)
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn xavier_bounds() {
        let m = ProjectionModel::init(2, 3, &ids(&["s1", "s2"]), InitScheme::Xavier, Activation::Linear, 1)
            .unwrap();
        let bw = (6.0f64 / 5.0).sqrt();
        assert!(m.w().iter().all(|x| x.abs() <= bw));
        let ba = (6.0f64 / 4.0).sqrt();
        for s in ["s1", "s2"] {
            assert!(m.diagonal(s).unwrap().iter().all(|x| x.abs() <= ba));
        }
    }

    #[test]
    fn uniform01_bounds() {
        let m = ProjectionModel::init(5, 7, &ids(&["a", "b", "c"]), InitScheme::Uniform01, Activation::Relu, 3)
            .unwrap();
        assert!(m.w().iter().all(|x| (0.0..=1.0).contains(x)));
        for s in m.senses() {
            assert!(m.diagonal(s).unwrap().iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn init_rejects_duplicates() {
        assert!(matches!(
            ProjectionModel::init(2, 2, &ids(&["s", "s"]), InitScheme::Xavier, Activation::Linear, 0),
            Err(ProjectionError::DuplicateSense(_))
        ));
    }

    #[test]
    fn zero_model_has_zero_residual() {
        let m = ProjectionModel::from_parts(2, 3, Activation::Linear, vec![0.0; 6], vec![("s".into(), vec![0.0; 2])])
            .unwrap();
        let r = rec("s", vec![1.0, -2.0, 3.0]);
        let g = [0.3f32, 0.7];
        let f = m.forward(&r, &g).unwrap();
        assert_eq!(f.residual, vec![0.0, 0.0]);
        assert_eq!(m.loss(&[(&r, &g[..])]).unwrap(), 0.0);
    }

    #[test]
    fn perfect_alignment() {
        let m = ProjectionModel::from_parts(
            2,
            2,
            Activation::Linear,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![("s".into(), vec![1.0, 1.0])],
        )
        .unwrap();
        let r = rec("s", vec![1.0, 2.0]);
        let f = m.forward(&r, &[1.0, 2.0]).unwrap();
        assert_eq!(f.residual, vec![0.0, 0.0]);
        let grads = m.gradients(&[(&r, &[1.0f32, 2.0][..])]).unwrap();
        assert!(grads.w.iter().all(|&x| x == 0.0));
        assert!(grads.diagonal("s", 2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn relu_prediction() {
        let m = ProjectionModel::from_parts(2, 1, Activation::Relu, vec![0.0; 2], vec![("s".into(), vec![-1.0, 2.0])])
            .unwrap();
        let f = m.forward(&rec("s", vec![0.0]), &[1.0, 1.0]).unwrap();
        assert_eq!(f.predicted_sense, vec![0.0, 2.0]);
    }

    #[test]
    fn three_four_five() {
        // W·c = (3, 4), prediction zero
        let m = ProjectionModel::from_parts(2, 1, Activation::Linear, vec![3.0, 4.0], vec![("s".into(), vec![0.0, 0.0])])
            .unwrap();
        let r = rec("s", vec![1.0]);
        assert_eq!(m.loss(&[(&r, &[1.0f32, 1.0][..])]).unwrap(), 25.0);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let m = ProjectionModel::init(2, 2, &ids(&["s"]), InitScheme::Xavier, Activation::Linear, 0).unwrap();
        assert!(matches!(m.loss(&[]), Err(ProjectionError::EmptyBatch)));
        assert!(matches!(m.gradients(&[]), Err(ProjectionError::EmptyBatch)));
    }

    #[test]
    fn forward_errors() {
        let m = ProjectionModel::init(2, 2, &ids(&["s"]), InitScheme::Xavier, Activation::Linear, 0).unwrap();
        assert!(matches!(
            m.forward(&rec("t", vec![0.0, 0.0]), &[0.0, 0.0]),
            Err(ProjectionError::UnknownSense(_))
        ));
        assert!(matches!(
            m.forward(&rec("s", vec![0.0, 0.0, 0.0]), &[0.0, 0.0]),
            Err(ProjectionError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            m.forward(&rec("s", vec![0.0, 0.0]), &[0.0]),
            Err(ProjectionError::DimensionMismatch { .. })
        ));
        let mut no_gold = rec("s", vec![0.0, 0.0]);
        no_gold.gold_sense = None;
        assert!(matches!(m.forward(&no_gold, &[0.0, 0.0]), Err(ProjectionError::MissingGold(_))));
    }

    #[test]
    fn gradient_sparsity() {
        let m = ProjectionModel::init(3, 2, &ids(&["s1", "s2"]), InitScheme::Xavier, Activation::Gelu, 5).unwrap();
        let r = rec("s1", vec![0.5, -0.5]);
        let g = [1.0f32, 2.0, -1.0];
        let grads = m.gradients(&[(&r, &g[..])]).unwrap();
        assert!(grads.diagonals.contains_key("s1"));
        assert!(!grads.diagonals.contains_key("s2"));
        assert_eq!(grads.diagonal("s2", 3), vec![0.0; 3]);
    }

    #[test]
    fn project_sense_cases() {
        let m = ProjectionModel::from_parts(
            2,
            1,
            Activation::Gelu,
            vec![0.0; 2],
            vec![("one".into(), vec![1.0, 1.0]), ("s".into(), vec![2.0, 0.0])],
        )
        .unwrap();
        assert_eq!(m.project_sense("one", &[3.0, 5.0]).unwrap(), vec![3.0, 5.0]);
        assert_eq!(m.project_sense("s", &[3.0, 5.0]).unwrap(), vec![6.0, 0.0]);
        assert!(matches!(m.project_sense("x", &[3.0, 5.0]), Err(ProjectionError::UnknownSense(_))));
    }

    #[test]
    fn checkpoint_round_trip_and_version_check() {
        let m = ProjectionModel::init(3, 4, &ids(&["a", "b"]), InitScheme::Uniform01, Activation::Relu, 11).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"CDEM");
        let back = ProjectionModel::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.p(), 3);
        assert_eq!(back.activation(), Activation::Relu);
        assert_eq!(back.senses(), m.senses());
        // f32 storage: re-serializing is bitwise stable
        assert_eq!(back.to_bytes(), bytes);
        for (x, y) in back.w().iter().zip(m.w()) {
            assert_eq!(*x, *y as f32 as f64);
        }

        let mut wrong = bytes.clone();
        wrong[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            ProjectionModel::read_from(&mut wrong.as_slice()),
            Err(ProjectionError::Checkpoint(_))
        ));
        let cut = &bytes[..bytes.len() - 1];
        assert!(ProjectionModel::read_from(&mut &cut[..]).is_err());
    }
}
