use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{io_err, Pos, Result, SenseInventory, StoreError};
use crate::binio::{at_eof, read_f32s, read_str16, write_f32s, write_str16};

pub const CONTEXT_DUMP_MAGIC: [u8; 4] = *b"CDE1";

/// One contextualized occurrence of a target word.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextRecord {
    pub instance_id: String,
    pub lemma: String,
    pub pos: Pos,
    pub gold_sense: Option<String>,
    pub vector: Vec<f32>,
}

/// A list of context records sharing one vector dimension `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextDump {
    q: usize,
    records: Vec<ContextRecord>,
}

impl ContextDump {
    /// Wraps records of dimension `q`, rejecting any record of another length.
    pub fn new(q: usize, records: Vec<ContextRecord>) -> Result<Self> {
        if q == 0 {
            return Err(StoreError::ZeroDimension);
        }
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.vector.len() != q {
                return Err(StoreError::MixedDimension {
                    expected: q,
                    found: r.vector.len(),
                    instance: r.instance_id.clone(),
                });
            }
            if r.vector.iter().any(|x| !x.is_finite()) {
                return Err(StoreError::NonFiniteVector(r.instance_id.clone()));
            }
            if !seen.insert(r.instance_id.as_str()) {
                return Err(duplicate(i as u64, &r.instance_id));
            }
        }
        Ok(ContextDump { q, records })
    }

    /// Infers `q` from the first record. Fails on an empty list since `q` is unknown.
    pub fn from_records(records: Vec<ContextRecord>) -> Result<Self> {
        let q = records.first().map(|r| r.vector.len()).ok_or_else(|| {
            StoreError::Encode("cannot infer dimension from an empty record list".into())
        })?;
        Self::new(q, records)
    }

    /// Records whose gold sense is not a candidate of their (lemma, POS).
    pub fn gold_violations<'a>(&'a self, inventory: &SenseInventory) -> Vec<&'a ContextRecord> {
        self.records
            .iter()
            .filter(|r| match &r.gold_sense {
                Some(s) => !inventory.is_candidate(&r.lemma, r.pos, s),
                None => false,
            })
            .collect()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn records(&self) -> &[ContextRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ContextRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        Self::read_from(&mut BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(io_err(path))
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| StoreError::Truncated { record: 0 })?;
        if magic != CONTEXT_DUMP_MAGIC {
            return Err(StoreError::BadMagic {
                found: magic,
                expected: CONTEXT_DUMP_MAGIC,
            });
        }
        let header = (|| -> io::Result<(u32, u64)> {
            Ok((
                r.read_u32::<LittleEndian>()?,
                r.read_u64::<LittleEndian>()?,
            ))
        })();
        let (q, count) = header.map_err(|_| StoreError::Truncated { record: 0 })?;
        if q == 0 {
            return Err(StoreError::ZeroDimension);
        }
        let q = q as usize;

        let mut records = Vec::with_capacity(count.min(1 << 20) as usize);
        let mut seen = HashSet::new();
        for idx in 0..count {
            let rec = read_record(r, q, idx)?;
            if !seen.insert(rec.instance_id.clone()) {
                return Err(duplicate(idx, &rec.instance_id));
            }
            records.push(rec);
        }
        if !at_eof(r).map_err(|e| StoreError::Encode(e.to_string()))? {
            return Err(StoreError::TrailingBytes);
        }
        Ok(ContextDump { q, records })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let q = u32::try_from(self.q)
            .map_err(|_| StoreError::Encode(format!("dimension {} exceeds u32", self.q)))?;
        let encode = |e: io::Error| StoreError::Encode(e.to_string());
        w.write_all(&CONTEXT_DUMP_MAGIC).map_err(encode)?;
        w.write_u32::<LittleEndian>(q).map_err(encode)?;
        w.write_u64::<LittleEndian>(self.records.len() as u64)
            .map_err(encode)?;
        for rec in &self.records {
            write_str16(w, &rec.instance_id).map_err(encode)?;
            write_str16(w, &rec.lemma).map_err(encode)?;
            w.write_u8(rec.pos.code()).map_err(encode)?;
            match &rec.gold_sense {
                Some(sense) => {
                    w.write_u8(1).map_err(encode)?;
                    write_str16(w, sense).map_err(encode)?;
                }
                None => w.write_u8(0).map_err(encode)?,
            }
            write_f32s(w, &rec.vector).map_err(encode)?;
        }
        Ok(())
    }
}

fn duplicate(record: u64, id: &str) -> StoreError {
    StoreError::InvalidRecord {
        record,
        message: format!("duplicate instance id `{id}`"),
    }
}

fn read_record<R: Read>(r: &mut R, q: usize, idx: u64) -> Result<ContextRecord> {
    let wrap = |e: io::Error| match e.kind() {
        io::ErrorKind::UnexpectedEof => StoreError::Truncated { record: idx },
        _ => StoreError::InvalidRecord {
            record: idx,
            message: e.to_string(),
        },
    };
    let instance_id = read_str16(r).map_err(wrap)?;
    let lemma = read_str16(r).map_err(wrap)?;
    let code = r.read_u8().map_err(wrap)?;
    let pos = Pos::from_code(code).ok_or_else(|| StoreError::InvalidRecord {
        record: idx,
        message: format!("unknown POS code {code}"),
    })?;
    let gold_sense = match r.read_u8().map_err(wrap)? {
        0 => None,
        1 => Some(read_str16(r).map_err(wrap)?),
        flag => {
            return Err(StoreError::InvalidRecord {
                record: idx,
                message: format!("gold flag must be 0 or 1, found {flag}"),
            })
        }
    };
    let vector = read_f32s(r, q).map_err(wrap)?;
    if vector.iter().any(|x| !x.is_finite()) {
        return Err(StoreError::NonFiniteVector(instance_id));
    }
    Ok(ContextRecord {
        instance_id,
        lemma,
        pos,
        gold_sense,
        vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, q: usize, gold: Option<&str>) -> ContextRecord {
        ContextRecord {
            instance_id: id.into(),
            lemma: "bank".into(),
            pos: Pos::Noun,
            gold_sense: gold.map(String::from),
            vector: (0..q).map(|i| i as f32 * 0.5 - 1.0).collect(),
        }
    }

    fn bytes_of(dump: &ContextDump) -> Vec<u8> {
        let mut buf = Vec::new();
        dump.write_to(&mut buf).unwrap();
        buf
    }

    #[test]
    fn single_record() {
        let dump = ContextDump::new(4, vec![record("d0.s0.t0", 4, Some("bank%00"))]).unwrap();
        let buf = bytes_of(&dump);
        let back = ContextDump::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.q(), 4);
        assert_eq!(back.records().len(), 1);
        assert_eq!(back.records()[0].vector.len(), 4);
        assert_eq!(back, dump);
    }

    #[test]
    fn header_layout() {
        let dump = ContextDump::new(4, vec![]).unwrap();
        let buf = bytes_of(&dump);
        assert_eq!(&buf[..4], b"CDE1");
        assert_eq!(&buf[4..8], &4u32.to_le_bytes());
        assert_eq!(&buf[8..16], &0u64.to_le_bytes());
        assert_eq!(buf.len(), 16);
        let back = ContextDump::read_from(&mut buf.as_slice()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn record_layout() {
        let rec = ContextRecord {
            instance_id: "i".into(),
            lemma: "ab".into(),
            pos: Pos::Adv,
            gold_sense: None,
            vector: vec![1.5],
        };
        let buf = bytes_of(&ContextDump::new(1, vec![rec]).unwrap());
        let body = &buf[16..];
        let expected: Vec<u8> = [
            &[1u8, 0][..],
            b"i",
            &[2, 0],
            b"ab",
            &[3],
            &[0],
            &1.5f32.to_le_bytes(),
        ]
        .concat();
        assert_eq!(body, expected.as_slice());
    }

    #[test]
    fn truncated_record_count() {
        let dump = ContextDump::new(
            2,
            vec![record("a", 2, None), record("b", 2, Some("bank%01"))],
        )
        .unwrap();
        let mut buf = bytes_of(&dump);
        buf[8..16].copy_from_slice(&3u64.to_le_bytes());
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::Truncated { record: 2 })
        ));
    }

    #[test]
    fn truncated_mid_vector() {
        let dump = ContextDump::new(3, vec![record("a", 3, None)]).unwrap();
        let buf = bytes_of(&dump);
        let cut = &buf[..buf.len() - 2];
        assert!(matches!(
            ContextDump::read_from(&mut &cut[..]),
            Err(StoreError::Truncated { record: 0 })
        ));
    }

    #[test]
    fn bad_magic_and_zero_q() {
        let mut buf = bytes_of(&ContextDump::new(2, vec![]).unwrap());
        buf[3] = b'9';
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::BadMagic { .. })
        ));
        let mut buf = bytes_of(&ContextDump::new(2, vec![]).unwrap());
        buf[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::ZeroDimension)
        ));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut buf = bytes_of(&ContextDump::new(2, vec![record("a", 2, None)]).unwrap());
        buf.push(0);
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::TrailingBytes)
        ));
    }

    #[test]
    fn mixed_dimension_rejected() {
        let err = ContextDump::from_records(vec![record("a", 4, None), record("b", 3, None)]);
        assert!(matches!(err, Err(StoreError::MixedDimension { expected: 4, found: 3, .. })));
    }

    #[test]
    fn bad_pos_code_and_gold_flag() {
        let mut buf = bytes_of(&ContextDump::new(1, vec![record("a", 1, None)]).unwrap());
        // magic(4) q(4) count(8) id(2+1) lemma(2+4) -> pos byte at 25
        buf[25] = 9;
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::InvalidRecord { record: 0, .. })
        ));
        let mut buf = bytes_of(&ContextDump::new(1, vec![record("a", 1, None)]).unwrap());
        buf[26] = 7;
        assert!(matches!(
            ContextDump::read_from(&mut buf.as_slice()),
            Err(StoreError::InvalidRecord { record: 0, .. })
        ));
    }

    #[test]
    fn non_finite_and_duplicates_rejected() {
        let mut bad = record("a", 2, None);
        bad.vector[1] = f32::NAN;
        assert!(matches!(ContextDump::new(2, vec![bad.clone()]), Err(StoreError::NonFiniteVector(_))));
        let dup = ContextDump::new(2, vec![record("a", 2, None), record("a", 2, None)]);
        assert!(matches!(dup, Err(StoreError::InvalidRecord { record: 1, .. })));

        // bypass the constructor to check the reader
        let raw = ContextDump { q: 2, records: vec![bad] };
        assert!(matches!(
            ContextDump::read_from(&mut bytes_of(&raw).as_slice()),
            Err(StoreError::NonFiniteVector(_))
        ));
        let raw = ContextDump { q: 2, records: vec![record("a", 2, None), record("a", 2, None)] };
        assert!(matches!(
            ContextDump::read_from(&mut bytes_of(&raw).as_slice()),
            Err(StoreError::InvalidRecord { record: 1, .. })
        ));
    }
}
