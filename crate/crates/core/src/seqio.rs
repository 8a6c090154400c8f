//! Labeled sequence ingestion, stratified resampling and synthetic data.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encode::CANONICAL_RESIDUES;
use crate::error::{Error, Result};
use crate::rng;

/// One labeled amino-acid sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceRecord {
    pub id: String,
    pub residues: String,
    pub label: String,
}

impl SequenceRecord {
    /// Builds a record, uppercasing residues and checking them against the raw
    /// input alphabet (uppercase letters, `*`, `-`).
    pub fn new(id: impl Into<String>, residues: &str, label: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let residues = residues.to_ascii_uppercase();
        if residues.is_empty() {
            return Err(Error::EmptySequence(id));
        }
        if let Some(bad) = residues.chars().find(|c| !is_raw_residue(*c)) {
            return Err(Error::InvalidResidue { id, residue: bad });
        }
        Ok(Self {
            id,
            residues,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

fn is_raw_residue(c: char) -> bool {
    c.is_ascii_uppercase() || c == '*' || c == '-'
}

/// A set of records plus the sorted class list that indexes their labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<SequenceRecord>,
    classes: Vec<String>,
    class_index: HashMap<String, usize>,
}

impl Dataset {
    /// Builds a dataset whose classes are the sorted distinct labels.
    pub fn new(records: Vec<SequenceRecord>) -> Result<Self> {
        let classes: Vec<String> = records
            .iter()
            .map(|r| r.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self::with_classes(records, classes)
    }

    /// Builds a dataset over an explicit class list. Used for split halves so
    /// that class indices stay aligned with the parent dataset.
    pub fn with_classes(records: Vec<SequenceRecord>, mut classes: Vec<String>) -> Result<Self> {
        classes.sort();
        classes.dedup();
        let class_index: HashMap<String, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            if r.residues.is_empty() {
                return Err(Error::EmptySequence(r.id.clone()));
            }
            if !class_index.contains_key(&r.label) {
                return Err(Error::MissingLabel(r.id.clone()));
            }
        }
        Ok(Self {
            records,
            classes,
            class_index,
        })
    }

    pub fn records(&self) -> &[SequenceRecord] {
        &self.records
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_of(&self, label: &str) -> Option<usize> {
        self.class_index.get(label).copied()
    }

    /// Class index of every record, in record order.
    pub fn targets(&self) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| self.class_index[&r.label])
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for t in self.targets() {
            counts[t] += 1;
        }
        counts
    }

    pub fn max_len(&self) -> usize {
        self.records.iter().map(SequenceRecord::len).max().unwrap_or(0)
    }
}

/// Repeated stratified train/test resampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            repeats: 5,
            seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::param(format!(
                "train_fraction must be in (0,1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::param("repeats must be >= 1"));
        }
        Ok(())
    }

    /// Number of training records drawn from a class of size `n`.
    pub fn train_count(&self, n: usize) -> usize {
        // The epsilon absorbs products like 0.7 * 30 landing just under an integer.
        let raw = (self.train_fraction * n as f64 + 1e-9).floor() as usize;
        raw.max(1).min(n.saturating_sub(1))
    }
}

/// Parses FASTA text. Without a label table the label is the header suffix
/// after the last `|`; the id is everything before it.
pub fn parse_fasta<R: Read>(
    mut input: R,
    labels: Option<&HashMap<String, String>>,
) -> Result<Dataset> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::MalformedFasta(e.to_string()))?;

    let mut entries: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(header) = line.strip_prefix('>') {
            entries.push((header.trim().to_string(), String::new()));
        } else if !line.is_empty() {
            match entries.last_mut() {
                Some((_, body)) => body.push_str(line),
                None => {
                    return Err(Error::MalformedFasta(
                        "sequence data before first header".into(),
                    ))
                }
            }
        }
    }

    let mut records = Vec::with_capacity(entries.len());
    for (header, body) in entries {
        let (id, suffix) = match header.rsplit_once('|') {
            Some((id, label)) => (id.trim().to_string(), Some(label.trim().to_string())),
            None => (header.clone(), None),
        };
        if id.is_empty() {
            return Err(Error::MalformedFasta(format!("empty id in header \"{header}\"")));
        }
        let label = match labels {
            Some(table) => table
                .get(&id)
                .cloned()
                .ok_or_else(|| Error::MissingLabel(id.clone()))?,
            None => suffix
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::MissingLabel(id.clone()))?,
        };
        records.push(SequenceRecord::new(id, &body, label)?);
    }
    Dataset::new(records)
}

/// Writes records as `>id|label` FASTA with bodies wrapped at `width` columns.
pub fn write_fasta(dataset: &Dataset, width: usize) -> String {
    let width = width.max(1);
    let mut out = String::new();
    for r in dataset.records() {
        let _ = writeln!(out, ">{}|{}", r.id, r.label);
        let bytes = r.residues.as_bytes();
        for chunk in bytes.chunks(width) {
            out.push_str(std::str::from_utf8(chunk).expect("ascii residues"));
            out.push('\n');
        }
    }
    out
}

/// Reads an `id,label` table; a leading `id,label` header row is skipped.
pub fn read_label_csv<R: Read>(input: R) -> Result<HashMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut table = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        if row.len() < 2 {
            return Err(Error::Config(format!("label CSV row {} has fewer than 2 columns", i + 1)));
        }
        if i == 0 && row[0].eq_ignore_ascii_case("id") && row[1].eq_ignore_ascii_case("label") {
            continue;
        }
        if table.insert(row[0].to_string(), row[1].to_string()).is_some() {
            return Err(Error::DuplicateId(row[0].to_string()));
        }
    }
    Ok(table)
}

pub fn write_label_csv(dataset: &Dataset) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["id", "label"])?;
    for r in dataset.records() {
        writer.write_record([r.id.as_str(), r.label.as_str()])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Splits each class independently: `max(1, floor(f * n_c))` records to train,
/// the rest to test. Both halves keep the original record order.
pub fn stratified_split(
    dataset: &Dataset,
    plan: &SplitPlan,
    repeat_index: usize,
) -> Result<(Dataset, Dataset)> {
    plan.validate()?;
    if repeat_index >= plan.repeats {
        return Err(Error::param(format!(
            "repeat_index {repeat_index} out of range for {} repeats",
            plan.repeats
        )));
    }
    let targets = dataset.targets();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.n_classes()];
    for (i, &t) in targets.iter().enumerate() {
        by_class[t].push(i);
    }

    let mut in_train = vec![false; dataset.len()];
    for (c, members) in by_class.iter_mut().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall(dataset.classes()[c].clone()));
        }
        let mut rng = rng::stream(plan.seed, "split", &[repeat_index as u64, c as u64]);
        members.shuffle(&mut rng);
        for &i in &members[..plan.train_count(members.len())] {
            in_train[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, &flag) in dataset.records().iter().zip(&in_train) {
        if flag {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    let classes = dataset.classes().to_vec();
    Ok((
        Dataset::with_classes(train, classes.clone())?,
        Dataset::with_classes(test, classes)?,
    ))
}

/// Draws one random reference per class and perturbs it by i.i.d. uniform
/// substitution. Labels are `C0..C{n-1}`.
pub fn generate_synthetic(
    n_classes: usize,
    per_class: &[usize],
    length: usize,
    mutation_rate: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_classes < 2 {
        return Err(Error::param("n_classes must be >= 2"));
    }
    if per_class.len() != n_classes {
        return Err(Error::param(format!(
            "per_class has {} entries for {n_classes} classes",
            per_class.len()
        )));
    }
    if !(0.0..0.5).contains(&mutation_rate) {
        return Err(Error::param(format!(
            "mutation_rate must be in [0, 0.5), got {mutation_rate}"
        )));
    }
    if length == 0 {
        return Err(Error::param("length must be >= 1"));
    }
    let alphabet = CANONICAL_RESIDUES.as_bytes();
    let mut records = Vec::with_capacity(per_class.iter().sum());
    for (c, &count) in per_class.iter().enumerate() {
        let mut rng = rng::stream(seed, "synthetic-reference", &[c as u64]);
        let reference: Vec<u8> = (0..length)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        let mut rng = rng::stream(seed, "synthetic-mutation", &[c as u64]);
        for k in 0..count {
            let residues: Vec<u8> = reference
                .iter()
                .map(|&r| {
                    if rng.gen::<f64>() < mutation_rate {
                        alphabet[rng.gen_range(0..alphabet.len())]
                    } else {
                        r
                    }
                })
                .collect();
            let residues = String::from_utf8(residues).expect("ascii residues");
            records.push(SequenceRecord::new(format!("syn{c}_{k}"), &residues, format!("C{c}"))?);
        }
    }
    Dataset::new(records)
}

/// Reference sequence of class `c` as drawn by [`generate_synthetic`].
pub fn synthetic_reference(c: usize, length: usize, seed: u64) -> String {
    let alphabet = CANONICAL_RESIDUES.as_bytes();
    let mut rng = rng::stream(seed, "synthetic-reference", &[c as u64]);
    (0..length)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_fasta(text.as_bytes(), None)
    }

    #[test]
    fn single_record() {
        let ds = parse(">s1|B.1.1.7\nMFVF\n").unwrap();
        assert_eq!(ds.len(), 1);
        let r = &ds.records()[0];
        assert_eq!((r.id.as_str(), r.residues.as_str(), r.label.as_str()), ("s1", "MFVF", "B.1.1.7"));
    }

    #[test]
    fn multi_line_bodies_concatenate() {
        let ds = parse(">a|X\nMF\nVF\n>b|Y\nACD\n").unwrap();
        let res: Vec<_> = ds.records().iter().map(|r| r.residues.as_str()).collect();
        assert_eq!(res, ["MFVF", "ACD"]);
        assert_eq!(ds.classes(), ["X", "Y"]);
    }

    #[test]
    fn lowercase_is_uppercased() {
        let ds = parse(">a|X\nmfvf\n").unwrap();
        assert_eq!(ds.records()[0].residues, "MFVF");
    }

    #[test]
    fn empty_body_rejected() {
        match parse(">s1|X\n\n") {
            Err(Error::EmptySequence(id)) => assert_eq!(id, "s1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        assert!(matches!(
            parse(">a|X\nMF\n>a|Y\nAC\n"),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
    }

    #[test]
    fn label_table_overrides_header() {
        let table: HashMap<_, _> = [("a".to_string(), "Z".to_string())].into();
        let ds = parse_fasta(">a|X\nMF\n".as_bytes(), Some(&table)).unwrap();
        assert_eq!(ds.records()[0].label, "Z");
        let err = parse_fasta(">b\nMF\n".as_bytes(), Some(&table)).unwrap_err();
        assert!(matches!(err, Error::MissingLabel(id) if id == "b"));
    }

    #[test]
    fn invalid_residue_rejected() {
        assert!(matches!(parse(">a|X\nMF1\n"), Err(Error::InvalidResidue { residue: '1', .. })));
    }

    #[test]
    fn label_csv_with_and_without_header() {
        let t = read_label_csv("id,label\ns1,A\ns2,B\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        let t = read_label_csv("s1,A\n".as_bytes()).unwrap();
        assert_eq!(t["s1"], "A");
    }

    fn uniform(n: usize, label: &str, prefix: &str) -> Vec<SequenceRecord> {
        (0..n)
            .map(|i| SequenceRecord::new(format!("{prefix}{i}"), "ACD", label).unwrap())
            .collect()
    }

    #[test]
    fn split_single_class_floor() {
        let ds = Dataset::new(uniform(10, "A", "a")).unwrap();
        let (train, test) = stratified_split(&ds, &SplitPlan::default(), 0).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
    }

    #[test]
    fn split_per_class_floor() {
        let mut recs = uniform(4, "A", "a");
        recs.extend(uniform(6, "B", "b"));
        let ds = Dataset::new(recs).unwrap();
        let (train, test) = stratified_split(&ds, &SplitPlan::default(), 0).unwrap();
        assert_eq!(train.class_counts(), [2, 4]);
        assert_eq!(test.class_counts(), [2, 2]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = generate_synthetic(3, &[7, 9, 11], 20, 0.1, 3).unwrap();
        let plan = SplitPlan { seed: 11, ..Default::default() };
        let a = stratified_split(&ds, &plan, 2).unwrap();
        let b = stratified_split(&ds, &plan, 2).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&ds, &plan, 3).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn split_rejects_singleton_class() {
        let mut recs = uniform(4, "A", "a");
        recs.extend(uniform(1, "B", "b"));
        let ds = Dataset::new(recs).unwrap();
        assert!(matches!(
            stratified_split(&ds, &SplitPlan::default(), 0),
            Err(Error::ClassTooSmall(c)) if c == "B"
        ));
    }

    #[test]
    fn synthetic_shape_and_zero_noise() {
        let ds = generate_synthetic(2, &[5, 5], 50, 0.0, 1).unwrap();
        assert_eq!(ds.len(), 10);
        assert!(ds.records().iter().all(|r| r.len() == 50));
        for c in 0..2 {
            let reference = synthetic_reference(c, 50, 1);
            let label = format!("C{c}");
            assert!(ds
                .records()
                .iter()
                .filter(|r| r.label == label)
                .all(|r| r.residues == reference));
        }
    }

    #[test]
    fn synthetic_mutation_rate_matches_expectation() {
        // E[hamming] = length * rate * 19/20 = 19
        let ds = generate_synthetic(2, &[60, 60], 1000, 0.02, 5).unwrap();
        let refs: Vec<String> = (0..2).map(|c| synthetic_reference(c, 1000, 5)).collect();
        let total: usize = ds
            .records()
            .iter()
            .map(|r| {
                let c = ds.class_of(&r.label).unwrap();
                r.residues.bytes().zip(refs[c].bytes()).filter(|(a, b)| a != b).count()
            })
            .sum();
        let mean = total as f64 / ds.len() as f64;
        assert!((mean - 19.0).abs() <= 19.0 * 0.15, "mean hamming {mean}");
    }

    #[test]
    fn synthetic_rejects_bad_params() {
        assert!(generate_synthetic(1, &[5], 10, 0.1, 0).is_err());
        assert!(generate_synthetic(2, &[5], 10, 0.1, 0).is_err());
        assert!(generate_synthetic(2, &[5, 5], 10, 0.5, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_and_stratifies(
            counts in prop::collection::vec(2usize..30, 2..5),
            frac in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let ds = generate_synthetic(counts.len(), &counts, 5, 0.3, seed).unwrap();
            let plan = SplitPlan { train_fraction: frac, repeats: 2, seed };
            let (train, test) = stratified_split(&ds, &plan, 1).unwrap();
            prop_assert_eq!(train.len() + test.len(), ds.len());
            let train_ids: HashSet<_> = train.records().iter().map(|r| r.id.clone()).collect();
            prop_assert!(test.records().iter().all(|r| !train_ids.contains(&r.id)));
            for (c, &n) in counts.iter().enumerate() {
                let expect = ((frac * n as f64 + 1e-9).floor() as usize).max(1).min(n - 1);
                prop_assert_eq!(train.class_counts()[c], expect);
                prop_assert!(test.class_counts()[c] >= 1);
            }
        }

        #[test]
        fn fasta_round_trip(
            seqs in prop::collection::vec("[A-Z*-]{1,130}", 1..8),
            width in 1usize..90,
        ) {
            let records: Vec<_> = seqs
                .iter()
                .enumerate()
                .map(|(i, s)| SequenceRecord::new(format!("r{i}"), s, format!("L{}", i % 3)).unwrap())
                .collect();
            let ds = Dataset::new(records).unwrap();
            let back = parse_fasta(write_fasta(&ds, width).as_bytes(), None).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
