//! The canonical crowd-labelled CSV format.
//!
//! One header line, then one row per image:
//!
//! ```text
//! usage,pixels,neutral,happiness,surprise,sadness,anger,disgust,fear,contempt,unknown,NF
//! Training,12 0 255 ...,4,0,0,1,3,0,0,2,0,0
//! ```
//!
//! `usage` is `Training`, `PublicTest` or `PrivateTest`; `pixels` holds a
//! space-separated square image of 0-255 grayscale values; the ten trailing
//! columns are crowd vote counts. Loading drops the `unknown`/`NF` columns,
//! renormalizes the remaining eight, skips rows left with zero votes, and
//! scales pixels by 1/255. Files are UTF-8 with LF line endings; CRLF is
//! accepted on input.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::{Dataset, LabelDistribution, LabeledSample, Usage};
use crate::error::{Error, Result};

pub const CANONICAL_HEADER: &str =
    "usage,pixels,neutral,happiness,surprise,sadness,anger,disgust,fear,contempt,unknown,NF";

const NUM_COLUMNS: usize = 12;
const NUM_EMOTION_CLASSES: usize = 8;

/// A loaded dataset plus the number of rows skipped because every retained
/// vote was zero.
#[derive(Debug)]
pub struct CsvLoadOutcome {
    pub dataset: Dataset,
    pub skipped_rows: usize,
}

pub fn load_ferplus_csv(path: &Path) -> Result<CsvLoadOutcome> {
    load_ferplus_reader(BufReader::new(File::open(path)?))
}

pub fn load_ferplus_reader<R: BufRead>(reader: R) -> Result<CsvLoadOutcome> {
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::format("empty file, expected canonical header")),
    };
    if header.trim_end_matches('\r') != CANONICAL_HEADER {
        return Err(Error::format(format!(
            "missing or wrong header; expected '{CANONICAL_HEADER}'"
        )));
    }

    let mut samples = Vec::new();
    let mut skipped_rows = 0usize;
    let mut feature_dim: Option<usize> = None;

    for (index, line) in lines {
        let line_no = index + 1; // 1-based, header is line 1
        let line = line?;
        let line = line.trim_end_matches('\r');

        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != NUM_COLUMNS {
            return Err(Error::parse(
                line_no,
                format!("expected {NUM_COLUMNS} columns, found {}", fields.len()),
            ));
        }

        let usage = match fields[0] {
            "Training" => Usage::Train,
            "PublicTest" => Usage::Validation,
            "PrivateTest" => Usage::Test,
            other => {
                return Err(Error::parse(line_no, format!("unknown usage '{other}'")));
            }
        };

        let mut features = Vec::new();
        for token in fields[1].split_whitespace() {
            let value: u32 = token
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad pixel value '{token}'")))?;
            if value > 255 {
                return Err(Error::parse(
                    line_no,
                    format!("pixel value {value} exceeds 255"),
                ));
            }
            features.push(value as f64 / 255.0);
        }
        let side = (features.len() as f64).sqrt().round() as usize;
        if side * side != features.len() || features.is_empty() {
            return Err(Error::validation(format!(
                "line {line_no}: pixel count {} is not a perfect square",
                features.len()
            )));
        }
        match feature_dim {
            None => feature_dim = Some(features.len()),
            Some(dim) if dim != features.len() => {
                return Err(Error::validation(format!(
                    "line {line_no}: pixel count {} differs from earlier rows ({dim})",
                    features.len()
                )));
            }
            _ => {}
        }

        let mut votes = Vec::with_capacity(10);
        for field in &fields[2..] {
            let count: u32 = field
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad vote count '{field}'")))?;
            votes.push(count);
        }

        // Drop unknown/NF; renormalization happens in LabelDistribution.
        let retained = votes[..NUM_EMOTION_CLASSES].to_vec();
        if retained.iter().all(|&c| c == 0) {
            skipped_rows += 1;
            continue;
        }
        let dist = LabelDistribution::from_counts(retained)?;
        samples.push(LabeledSample::new(samples.len(), features, dist, usage));
    }

    let dataset = Dataset::new(samples, NUM_EMOTION_CLASSES)?;
    Ok(CsvLoadOutcome {
        dataset,
        skipped_rows,
    })
}

fn usage_token(usage: Usage) -> &'static str {
    match usage {
        Usage::Train => "Training",
        Usage::Validation => "PublicTest",
        Usage::Test => "PrivateTest",
    }
}

pub fn write_canonical_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    write_canonical_writer(dataset, BufWriter::new(File::create(path)?))
}

/// Emit the canonical CSV: LF line endings, pixels as `round(f * 255)`.
/// Only 8-class datasets with square feature lengths fit the format.
pub fn write_canonical_writer<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    if dataset.num_classes() != NUM_EMOTION_CLASSES {
        return Err(Error::validation(format!(
            "canonical CSV is {NUM_EMOTION_CLASSES}-class, dataset has {}",
            dataset.num_classes()
        )));
    }
    let dim = dataset.feature_dim();
    let side = (dim as f64).sqrt().round() as usize;
    if side * side != dim {
        return Err(Error::validation(format!(
            "feature length {dim} is not a perfect square"
        )));
    }

    writeln!(writer, "{CANONICAL_HEADER}")?;
    let mut pixel_buf = String::new();
    for sample in dataset.samples() {
        pixel_buf.clear();
        for (i, &f) in sample.features.iter().enumerate() {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::validation(format!(
                    "sample {} feature {f} outside [0, 1]",
                    sample.id
                )));
            }
            if i > 0 {
                pixel_buf.push(' ');
            }
            let byte = (f * 255.0).round() as u32;
            pixel_buf.push_str(&byte.to_string());
        }
        write!(writer, "{},{}", usage_token(sample.usage), pixel_buf)?;
        for &count in sample.label_dist.counts() {
            write!(writer, ",{count}")?;
        }
        // unknown and NF votes are not retained; emit zeros.
        writeln!(writer, ",0,0")?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn three_row_fixture() -> String {
        let px = |v: u32| (0..4).map(|_| v.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "{CANONICAL_HEADER}\n\
             Training,{},2,8,0,0,0,0,0,0,0,0\n\
             PublicTest,{},0,0,5,0,0,0,0,5,0,0\n\
             PrivateTest,{},1,1,1,1,1,1,1,3,0,0\n",
            px(0),
            px(128),
            px(255)
        )
    }

    #[test]
    fn loads_the_three_row_fixture() {
        let outcome = load_ferplus_reader(Cursor::new(three_row_fixture())).unwrap();
        let ds = &outcome.dataset;
        assert_eq!(outcome.skipped_rows, 0);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.num_classes(), 8);
        assert_eq!(ds.feature_dim(), 4);

        let s0 = &ds.samples()[0];
        assert_eq!(s0.usage, Usage::Train);
        assert_eq!(s0.hard_label, 1); // happiness
        assert!((s0.label_dist.probabilities()[0] - 0.2).abs() < 1e-12);
        assert!((s0.label_dist.probabilities()[1] - 0.8).abs() < 1e-12);
        assert_eq!(s0.features, vec![0.0; 4]);

        let s1 = &ds.samples()[1];
        assert_eq!(s1.usage, Usage::Validation);
        assert_eq!(s1.hard_label, 2); // surprise ties contempt? no: 5 vs 5, lowest index 2
        assert!((s1.features[0] - 128.0 / 255.0).abs() < 1e-15);

        let s2 = &ds.samples()[2];
        assert_eq!(s2.usage, Usage::Test);
        assert_eq!(s2.hard_label, 7);
        assert_eq!(s2.features, vec![1.0; 4]);
    }

    #[test]
    fn skips_rows_with_only_unknown_votes() {
        let csv = format!(
            "{CANONICAL_HEADER}\n\
             Training,0 0 0 0,1,0,0,0,0,0,0,0,0,0\n\
             Training,0 0 0 0,0,0,0,0,0,0,0,0,7,3\n"
        );
        let outcome = load_ferplus_reader(Cursor::new(csv)).unwrap();
        assert_eq!(outcome.skipped_rows, 1);
        assert_eq!(outcome.dataset.len(), 1);
    }

    #[test]
    fn accepts_crlf() {
        let csv = three_row_fixture().replace('\n', "\r\n");
        let outcome = load_ferplus_reader(Cursor::new(csv)).unwrap();
        assert_eq!(outcome.dataset.len(), 3);
    }

    #[test]
    fn rejects_malformed_input() {
        // Wrong header.
        let err = load_ferplus_reader(Cursor::new("usage,pixels\nTraining,0,1".to_string()));
        assert!(matches!(err, Err(Error::Format(_))));

        // Bad column count, with line number.
        let csv = format!("{CANONICAL_HEADER}\nTraining,0 0 0 0,1,2\n");
        match load_ferplus_reader(Cursor::new(csv)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        // Bad usage token.
        let csv = format!("{CANONICAL_HEADER}\nTesting,0 0 0 0,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            load_ferplus_reader(Cursor::new(csv)),
            Err(Error::Parse { line: 2, .. })
        ));

        // Non-square pixel count.
        let csv = format!("{CANONICAL_HEADER}\nTraining,0 0 0,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            load_ferplus_reader(Cursor::new(csv)),
            Err(Error::Validation(_))
        ));

        // Pixel out of range.
        let csv = format!("{CANONICAL_HEADER}\nTraining,0 0 0 300,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            load_ferplus_reader(Cursor::new(csv)),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn round_trip_is_identical() {
        let outcome = load_ferplus_reader(Cursor::new(three_row_fixture())).unwrap();
        let mut bytes = Vec::new();
        write_canonical_writer(&outcome.dataset, &mut bytes).unwrap();
        let reloaded = load_ferplus_reader(Cursor::new(bytes.clone())).unwrap();
        assert_eq!(outcome.dataset, reloaded.dataset);

        // Re-serializing the reloaded dataset is byte-identical.
        let mut again = Vec::new();
        write_canonical_writer(&reloaded.dataset, &mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn loaded_features_stay_in_unit_interval() {
        let outcome = load_ferplus_reader(Cursor::new(three_row_fixture())).unwrap();
        for s in outcome.dataset.samples() {
            assert!(s.features.iter().all(|&f| (0.0..=1.0).contains(&f)));
            let sum: f64 = s.label_dist.probabilities().as_slice().iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }
}
