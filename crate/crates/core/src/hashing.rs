//! Multidimensional tuple hashing through per-dimension random look-up tables.
//!
//! Every dimension gets its own table mapping attribute values to uniformly
//! random L-bit words, drawn the first time a value is met. The hash of a
//! projected tuple is the exclusive-or of the words of its fields. Tables are
//! keyed by dimension index, so views that share a dimension share its table.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::ViewQuery;

/// Hash output width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashBits {
    L32,
    L64,
}

impl HashBits {
    pub fn width(self) -> u32 {
        match self {
            HashBits::L32 => 32,
            HashBits::L64 => 64,
        }
    }

    pub fn mask(self) -> u64 {
        match self {
            HashBits::L32 => u32::MAX as u64,
            HashBits::L64 => u64::MAX,
        }
    }

    /// 2^L as a float.
    pub fn range(self) -> f64 {
        2f64.powi(self.width() as i32)
    }

    pub fn from_width(width: u32) -> Result<Self> {
        match width {
            32 => Ok(HashBits::L32),
            64 => Ok(HashBits::L64),
            w => Err(Error::invalid(format!("hash width must be 32 or 64, got {w}"))),
        }
    }
}

/// 0-based index of the least significant 1-bit among the low `width` bits
/// of `word`, or `width` when those bits are all zero.
#[inline]
pub fn first_one_bit_position(word: u64, width: u32) -> u32 {
    let masked = if width >= 64 {
        word
    } else {
        word & ((1u64 << width) - 1)
    };
    if masked == 0 {
        width.min(64)
    } else {
        masked.trailing_zeros()
    }
}

// Values that are canonical decimal integers below this bound live in a
// dense array; anything else switches the table to a hash map.
const DENSE_LIMIT: u32 = 1 << 16;

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<Option<u64>>),
    Sparse(HashMap<String, u64>),
}

/// Lazily populated map from attribute value to a random word.
#[derive(Debug, Clone)]
pub struct DimensionHashTable {
    dim: usize,
    mask: u64,
    rng: ChaCha8Rng,
    storage: Storage,
    len: usize,
}

fn small_int(value: &str) -> Option<u32> {
    let b = value.as_bytes();
    if b.is_empty() || b.len() > 5 || !b.iter().all(u8::is_ascii_digit) || (b.len() > 1 && b[0] == b'0') {
        return None;
    }
    let n: u32 = value.parse().ok()?;
    (n < DENSE_LIMIT).then_some(n)
}

impl DimensionHashTable {
    /// A table whose words come from the ChaCha stream `dim` of `master_seed`.
    pub fn new(dim: usize, bits: HashBits, master_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(dim as u64);
        DimensionHashTable {
            dim,
            mask: bits.mask(),
            rng,
            storage: Storage::Dense(Vec::new()),
            len: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct values hashed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Word of `value`, drawing and storing a fresh one on first sight.
    pub fn hash(&mut self, value: &str) -> u64 {
        if let Storage::Dense(slots) = &mut self.storage {
            if let Some(n) = small_int(value) {
                let n = n as usize;
                if n >= slots.len() {
                    slots.resize(n + 1, None);
                }
                return match slots[n] {
                    Some(w) => w,
                    None => {
                        let w = self.rng.next_u64() & self.mask;
                        slots[n] = Some(w);
                        self.len += 1;
                        w
                    }
                };
            }
            self.go_sparse();
        }
        let Storage::Sparse(map) = &mut self.storage else {
            unreachable!("table switched to sparse storage above")
        };
        if let Some(&w) = map.get(value) {
            return w;
        }
        let w = self.rng.next_u64() & self.mask;
        map.insert(value.to_owned(), w);
        self.len += 1;
        w
    }

    /// Word of `value` if it has already been drawn.
    pub fn get(&self, value: &str) -> Option<u64> {
        match &self.storage {
            Storage::Dense(slots) => small_int(value).and_then(|n| slots.get(n as usize).copied().flatten()),
            Storage::Sparse(map) => map.get(value).copied(),
        }
    }

    fn go_sparse(&mut self) {
        if let Storage::Dense(slots) = &self.storage {
            let map = slots
                .iter()
                .enumerate()
                .filter_map(|(n, w)| w.map(|w| (n.to_string(), w)))
                .collect();
            self.storage = Storage::Sparse(map);
        }
    }

    fn entries(&self) -> Vec<(String, u64)> {
        let mut out: Vec<(String, u64)> = match &self.storage {
            Storage::Dense(slots) => slots
                .iter()
                .enumerate()
                .filter_map(|(n, w)| w.map(|w| (n.to_string(), w)))
                .collect(),
            Storage::Sparse(map) => map.iter().map(|(k, &w)| (k.clone(), w)).collect(),
        };
        out.sort_unstable();
        out
    }

    fn restore(&mut self, value: String, word: u64) {
        if let (Storage::Dense(slots), Some(n)) = (&mut self.storage, small_int(&value)) {
            let n = n as usize;
            if n >= slots.len() {
                slots.resize(n + 1, None);
            }
            if slots[n].replace(word).is_none() {
                self.len += 1;
            }
            return;
        }
        self.go_sparse();
        if let Storage::Sparse(map) = &mut self.storage {
            if map.insert(value, word).is_none() {
                self.len += 1;
            }
        }
    }
}

/// Hashes projected tuples to L-bit words by xoring per-dimension tables.
#[derive(Debug, Clone)]
pub struct TupleHasher {
    bits: HashBits,
    seed: u64,
    tables: Vec<Option<DimensionHashTable>>,
}

impl TupleHasher {
    pub fn new(bits: HashBits, seed: u64) -> Self {
        TupleHasher {
            bits,
            seed,
            tables: Vec::new(),
        }
    }

    pub fn bits(&self) -> HashBits {
        self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The table of dimension `dim`, created on first use.
    pub fn table_mut(&mut self, dim: usize) -> &mut DimensionHashTable {
        if dim >= self.tables.len() {
            self.tables.resize_with(dim + 1, || None);
        }
        let (bits, seed) = (self.bits, self.seed);
        self.tables[dim].get_or_insert_with(|| DimensionHashTable::new(dim, bits, seed))
    }

    pub fn table(&self, dim: usize) -> Option<&DimensionHashTable> {
        self.tables.get(dim).and_then(Option::as_ref)
    }

    /// Hash of a single attribute value of dimension `dim`.
    pub fn hash_attribute(&mut self, dim: usize, value: &str) -> u64 {
        self.table_mut(dim).hash(value)
    }

    /// Hash of the tuple `values` whose fields belong to dimensions `dims`.
    pub fn hash_tuple<S: AsRef<str>>(&mut self, dims: &[usize], values: &[S]) -> Result<u64> {
        if dims.len() != values.len() {
            return Err(Error::ArityMismatch {
                expected: dims.len(),
                found: values.len(),
            });
        }
        Ok(dims
            .iter()
            .zip(values)
            .fold(0, |acc, (&d, v)| acc ^ self.hash_attribute(d, v.as_ref())))
    }

    /// Projects `row` onto `query` and hashes the result.
    pub fn hash_row(&mut self, row: &[String], query: &ViewQuery) -> Result<u64> {
        let mut h = 0;
        for &d in query.dims() {
            let v = row.get(d).ok_or(Error::DimensionOutOfRange {
                index: d,
                arity: row.len(),
            })?;
            h ^= self.hash_attribute(d, v);
        }
        Ok(h)
    }

    /// Read-only variant of [`hash_row`](Self::hash_row) for frozen tables:
    /// `None` when some field has never been hashed.
    pub fn lookup_row(&self, row: &[String], query: &ViewQuery) -> Option<u64> {
        query
            .dims()
            .iter()
            .try_fold(0, |acc, &d| Some(acc ^ self.table(d)?.get(row.get(d)?)?))
    }

    /// Writes all tables to `path`.
    ///
    /// Layout, little-endian: magic `VSZH`, version byte, width byte, master
    /// seed `u64`, table count `u32`; per table: dimension `u32`, generator
    /// word position `u128`, entry count `u64`; per entry: value length
    /// `u32`, value bytes, word `u64`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(HASH_MAGIC)?;
        out.write_all(&[FORMAT_VERSION, self.bits.width() as u8])?;
        out.write_all(&self.seed.to_le_bytes())?;
        let tables: Vec<&DimensionHashTable> = self.tables.iter().flatten().collect();
        out.write_all(&(tables.len() as u32).to_le_bytes())?;
        for t in tables {
            out.write_all(&(t.dim as u32).to_le_bytes())?;
            out.write_all(&t.rng.get_word_pos().to_le_bytes())?;
            let entries = t.entries();
            out.write_all(&(entries.len() as u64).to_le_bytes())?;
            for (value, word) in entries {
                out.write_all(&(value.len() as u32).to_le_bytes())?;
                out.write_all(value.as_bytes())?;
                out.write_all(&word.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Restores tables written by [`save`](Self::save); values not yet seen
    /// keep drawing from where the saved generators stopped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != HASH_MAGIC {
            return Err(Error::format("hash table file", "bad magic"));
        }
        let [version, width] = read_array::<2>(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::format(
                "hash table file",
                format!("unsupported version {version}"),
            ));
        }
        let bits = HashBits::from_width(width as u32)?;
        let seed = u64::from_le_bytes(read_array(&mut r)?);
        let mut hasher = TupleHasher::new(bits, seed);
        let n_tables = u32::from_le_bytes(read_array(&mut r)?);
        for _ in 0..n_tables {
            let dim = u32::from_le_bytes(read_array(&mut r)?) as usize;
            let word_pos = u128::from_le_bytes(read_array(&mut r)?);
            let n = u64::from_le_bytes(read_array(&mut r)?);
            let table = hasher.table_mut(dim);
            table.rng.set_word_pos(word_pos);
            for _ in 0..n {
                let len = u32::from_le_bytes(read_array(&mut r)?) as usize;
                let mut bytes = vec![0u8; len];
                r.read_exact(&mut bytes)?;
                let value =
                    String::from_utf8(bytes).map_err(|_| Error::format("hash table file", "value is not UTF-8"))?;
                let word = u64::from_le_bytes(read_array(&mut r)?);
                table.restore(value, word);
            }
        }
        Ok(hasher)
    }
}

const HASH_MAGIC: &[u8; 4] = b"VSZH";
const FORMAT_VERSION: u8 = 1;

pub(crate) fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_one_bit_examples() {
        assert_eq!(first_one_bit_position(0b0001, 64), 0);
        assert_eq!(first_one_bit_position(0b1000, 64), 3);
        assert_eq!(first_one_bit_position(0, 32), 32);
        assert_eq!(first_one_bit_position(0, 64), 64);
        // bits above the window are ignored
        assert_eq!(first_one_bit_position(1 << 40, 32), 32);
        assert_eq!(first_one_bit_position(1 << 63, 64), 63);
    }

    #[test]
    fn same_value_same_word() {
        let mut t = DimensionHashTable::new(0, HashBits::L64, 1);
        let a = t.hash("monday");
        assert_eq!(t.hash("monday"), a);
        assert_ne!(t.hash("tuesday"), a);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn thirty_two_bit_words_fit() {
        let mut t = DimensionHashTable::new(3, HashBits::L32, 9);
        for i in 0..1000 {
            assert!(t.hash(&format!("v{i}")) <= u32::MAX as u64);
        }
    }

    #[test]
    fn hours_of_a_year_table() {
        let mut t = DimensionHashTable::new(0, HashBits::L64, 5);
        for _ in 0..2 {
            for h in 0..8760 {
                t.hash(&h.to_string());
            }
        }
        assert_eq!(t.len(), 8760);
        assert!(t.is_dense());
    }

    #[test]
    fn dense_to_sparse_keeps_words() {
        let mut t = DimensionHashTable::new(1, HashBits::L64, 5);
        let w7 = t.hash("7");
        let w0 = t.hash("0");
        assert!(t.is_dense());
        // leading zero and large values are not canonical small ints
        let w07 = t.hash("07");
        assert!(!t.is_dense());
        assert_ne!(w07, w7);
        assert_eq!(t.hash("7"), w7);
        assert_eq!(t.hash("0"), w0);
        t.hash("123456789");
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn tuple_hash_is_xor_of_attributes() {
        let mut h = TupleHasher::new(HashBits::L64, 11);
        let a = h.hash_attribute(0, "a");
        let b = h.hash_attribute(2, "b");
        assert_eq!(h.hash_tuple(&[0], &["a"]).unwrap(), a);
        assert_eq!(h.hash_tuple(&[0, 2], &["a", "b"]).unwrap(), a ^ b);
        assert_eq!(h.hash_tuple(&[0, 2], &["a", "b"]).unwrap(), a ^ b);
        assert!(matches!(
            h.hash_tuple(&[0, 2], &["a"]),
            Err(Error::ArityMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn tables_are_shared_across_views() {
        let mut h = TupleHasher::new(HashBits::L64, 3);
        let row: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let q12 = ViewQuery::new(vec![0, 1], 3).unwrap();
        let q23 = ViewQuery::new(vec![1, 2], 3).unwrap();
        let h12 = h.hash_row(&row, &q12).unwrap();
        let h23 = h.hash_row(&row, &q23).unwrap();
        assert_eq!(h.table(1).unwrap().len(), 1);
        let y = h.hash_attribute(1, "y");
        assert_eq!(h12 ^ h23, h.hash_attribute(0, "x") ^ h.hash_attribute(2, "z"));
        assert_eq!(h.lookup_row(&row, &q12), Some(h12));
        assert_ne!(y, 0);
        let unseen: Vec<String> = ["w", "y", "z"].iter().map(|s| s.to_string()).collect();
        assert_eq!(h.lookup_row(&unseen, &q12), None);
    }

    #[test]
    fn master_seed_determinism() {
        let words = |seed| {
            let mut h = TupleHasher::new(HashBits::L64, seed);
            (0..100)
                .map(|i| h.hash_attribute(i % 3, &format!("v{i}")))
                .collect::<Vec<_>>()
        };
        assert_eq!(words(5), words(5));
        assert_ne!(words(5), words(6));
    }

    #[test]
    fn save_and_load() {
        let mut h = TupleHasher::new(HashBits::L32, 99);
        for i in 0..50 {
            h.hash_attribute(0, &i.to_string());
            h.hash_attribute(3, &format!("name-{i}"));
        }
        let f = tempfile::NamedTempFile::new().unwrap();
        h.save(f.path()).unwrap();
        let mut back = TupleHasher::load(f.path()).unwrap();
        assert_eq!(back.bits(), HashBits::L32);
        assert_eq!(back.seed(), 99);
        for i in 0..50 {
            assert_eq!(
                back.hash_attribute(0, &i.to_string()),
                h.hash_attribute(0, &i.to_string())
            );
            let name = format!("name-{i}");
            assert_eq!(back.hash_attribute(3, &name), h.hash_attribute(3, &name));
        }
        // new values continue the saved generator stream
        assert_eq!(back.hash_attribute(3, "fresh"), h.hash_attribute(3, "fresh"));
        assert_eq!(back.hash_attribute(0, "60"), h.hash_attribute(0, "60"));
    }

    #[test]
    fn load_rejects_garbage() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), b"nope").unwrap();
        assert!(TupleHasher::load(f.path()).is_err());
    }
}
