//! MNIST IDX container parsing, pixel binarization and experiment
//! subset carving.
//!
//! The IDX layout is big-endian throughout: a 32-bit magic (2051 for
//! image files, 2049 for label files), 32-bit dimension fields, then the
//! raw payload. Parsing is strict: truncated or surplus bytes are
//! rejected with expected/actual counts. Gzip-compressed files are
//! recognized by their two-byte signature and decompressed
//! transparently.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pattern::{BinaryPattern, ClassLabel, LabeledPattern, TrainingSet};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

/// Number of digit classes.
pub const DIGIT_CLASSES: usize = 10;

/// A grey-shade image, row-major, one byte per pixel.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::IdxLength { expected: width * height, found: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Parsed images and labels of one dataset split.
#[derive(Clone, Debug)]
pub struct IdxDataset {
    images: Vec<GrayImage>,
    labels: Vec<u8>,
}

impl IdxDataset {
    pub fn new(images: Vec<GrayImage>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::InvalidParameter {
                name: "dataset",
                reason: format!("{} images but {} labels", images.len(), labels.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::IdxLabelValue { value: bad });
        }
        Ok(Self { images, labels })
    }

    /// Load a split from an image file and a label file, either plain
    /// IDX or gzip-compressed.
    pub fn from_files(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Self> {
        let image_bytes = read_maybe_gzip(images.as_ref())?;
        let label_bytes = read_maybe_gzip(labels.as_ref())?;
        Self::new(parse_idx_images(&image_bytes)?, parse_idx_labels(&label_bytes)?)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::IdxLength { expected: end, found: bytes.len() });
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

/// Read a file, transparently gunzipping when the two-byte gzip
/// signature is present.
pub fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut decoded = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut decoded)?;
        Ok(decoded)
    } else {
        Ok(raw)
    }
}

/// Parse an IDX image file: magic 2051, count, rows, cols, then
/// `count * rows * cols` pixel bytes, nothing more and nothing less.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::IdxMagic { expected: IMAGE_MAGIC, found: magic });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() != expected {
        return Err(Error::IdxLength { expected, found: bytes.len() });
    }
    let stride = rows * cols;
    Ok((0..count)
        .map(|i| GrayImage {
            width: cols,
            height: rows,
            pixels: bytes[16 + i * stride..16 + (i + 1) * stride].to_vec(),
        })
        .collect())
}

/// Parse an IDX label file: magic 2049, count, then `count` label bytes
/// each at most 9.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::IdxMagic { expected: LABEL_MAGIC, found: magic });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() != expected {
        return Err(Error::IdxLength { expected, found: bytes.len() });
    }
    let labels = bytes[8..].to_vec();
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::IdxLabelValue { value: bad });
    }
    Ok(labels)
}

/// Serialize images back to IDX bytes; the exact inverse of
/// [`parse_idx_images`]. All images must share one geometry.
pub fn write_idx_images(images: &[GrayImage]) -> Result<Vec<u8>> {
    let (rows, cols) = images
        .first()
        .map(|im| (im.height, im.width))
        .unwrap_or((0, 0));
    let mut bytes = Vec::with_capacity(16 + images.len() * rows * cols);
    bytes.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(images.len() as u32).to_be_bytes());
    bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    for image in images {
        if image.height != rows || image.width != cols {
            return Err(Error::InvalidParameter {
                name: "images",
                reason: "all images must share one geometry".into(),
            });
        }
        bytes.extend_from_slice(&image.pixels);
    }
    Ok(bytes)
}

/// Serialize labels back to IDX bytes; the exact inverse of
/// [`parse_idx_labels`].
pub fn write_idx_labels(labels: &[u8]) -> Result<Vec<u8>> {
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::IdxLabelValue { value: bad });
    }
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend_from_slice(labels);
    Ok(bytes)
}

/// Threshold an image into a binary pattern: bit k is 1 iff pixel k is
/// at least `threshold` (inclusive).
pub fn binarize(image: &GrayImage, threshold: u8) -> BinaryPattern {
    BinaryPattern::from_fn(image.pixels.len(), |k| image.pixels[k] >= threshold)
        .expect("images have at least one pixel")
}

/// How experiment subsets are drawn from a split.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubsetSelection {
    /// The first records in file order; bit-reproducible default.
    FirstN,
    /// Uniform sample without replacement from the given seed; the
    /// drawn indices are re-sorted into file order.
    Seeded(u64),
}

fn select_indices(selection: SubsetSelection, available: usize, wanted: usize) -> Result<Vec<usize>> {
    if wanted == 0 || wanted > available {
        return Err(Error::InvalidParameter {
            name: "subset_size",
            reason: format!("must be in 1..={available}, got {wanted}"),
        });
    }
    match selection {
        SubsetSelection::FirstN => Ok((0..wanted).collect()),
        SubsetSelection::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut chosen = rand::seq::index::sample(&mut rng, available, wanted).into_vec();
            chosen.sort_unstable();
            Ok(chosen)
        }
    }
}

/// Carve a labeled training set and a test list out of the two splits.
/// Patterns are binarized at `threshold`; the class count is fixed at
/// ten digits.
pub fn make_subsets(
    train: &IdxDataset,
    test: &IdxDataset,
    n_train: usize,
    n_test: usize,
    selection: SubsetSelection,
    threshold: u8,
) -> Result<(TrainingSet, Vec<(BinaryPattern, ClassLabel)>)> {
    let train_indices = select_indices(selection, train.len(), n_train)?;
    let test_indices = select_indices(selection, test.len(), n_test)?;

    let members = train_indices
        .iter()
        .map(|&i| LabeledPattern {
            pattern: binarize(&train.images[i], threshold),
            label: ClassLabel(train.labels[i] as u16),
        })
        .collect();
    let training = TrainingSet::new(members, DIGIT_CLASSES)?;

    let test_pairs = test_indices
        .iter()
        .map(|&i| {
            (
                binarize(&test.images[i], threshold),
                ClassLabel(test.labels[i] as u16),
            )
        })
        .collect();
    Ok((training, test_pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;
    use std::io::Write;

    fn image_header(count: u32, rows: u32, cols: u32) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&count.to_be_bytes());
        bytes.extend_from_slice(&rows.to_be_bytes());
        bytes.extend_from_slice(&cols.to_be_bytes());
        bytes
    }

    #[test]
    fn zero_record_files_parse_to_empty() {
        assert!(parse_idx_images(&image_header(0, 28, 28)).unwrap().is_empty());
        let mut labels = Vec::new();
        labels.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        labels.extend_from_slice(&0u32.to_be_bytes());
        assert!(parse_idx_labels(&labels).unwrap().is_empty());
    }

    #[test]
    fn label_magic_in_image_slot_is_rejected() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&[0; 12]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::IdxMagic { expected: IMAGE_MAGIC, found: LABEL_MAGIC })
        ));
    }

    #[test]
    fn truncated_payload_is_rejected_with_counts() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&10u32.to_be_bytes());
        bytes.extend_from_slice(&[1u8; 9]);
        assert!(matches!(
            parse_idx_labels(&bytes),
            Err(Error::IdxLength { expected: 18, found: 17 })
        ));
    }

    #[test]
    fn surplus_bytes_are_rejected() {
        let mut bytes = image_header(1, 2, 2);
        bytes.extend_from_slice(&[0u8; 5]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::IdxLength { expected: 20, found: 21 })
        ));
    }

    #[test]
    fn label_value_above_nine_is_rejected() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.push(10);
        assert!(matches!(
            parse_idx_labels(&bytes),
            Err(Error::IdxLabelValue { value: 10 })
        ));
    }

    #[test]
    fn binarize_extremes_and_boundary() {
        let zeros = GrayImage::new(2, 2, vec![0; 4]).unwrap();
        assert_eq!(binarize(&zeros, 128).count_ones(), 0);
        let full = GrayImage::new(2, 2, vec![255; 4]).unwrap();
        assert_eq!(binarize(&full, 128).count_ones(), 4);
        // A pixel exactly at the threshold maps to 1.
        let edge = GrayImage::new(1, 2, vec![127, 128]).unwrap();
        let pattern = binarize(&edge, 128);
        assert!(!pattern.get(0));
        assert!(pattern.get(1));
    }

    #[test]
    fn gzip_files_are_sniffed_and_decompressed() {
        let bytes = write_idx_labels(&[3, 1, 4]).unwrap();
        let dir = std::env::temp_dir().join(format!("qpc-mnist-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("labels.gz");
        let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
        encoder.write_all(&bytes).unwrap();
        std::fs::write(&path, encoder.finish().unwrap()).unwrap();
        let decoded = read_maybe_gzip(&path).unwrap();
        assert_eq!(decoded, bytes);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn subsets_first_n_and_determinism() {
        let images: Vec<GrayImage> = (0..20)
            .map(|i| GrayImage::new(2, 2, vec![i as u8 * 10; 4]).unwrap())
            .collect();
        let labels: Vec<u8> = (0..20).map(|i| i % 10).collect();
        let dataset = IdxDataset::new(images, labels).unwrap();

        let (training, tests) =
            make_subsets(&dataset, &dataset, 8, 4, SubsetSelection::FirstN, 128).unwrap();
        assert_eq!(training.len(), 8);
        assert_eq!(tests.len(), 4);
        assert_eq!(training.class_count(), DIGIT_CLASSES);
        assert_eq!(training.members()[3].label, ClassLabel(3));

        // Identity subset.
        let (full, _) = make_subsets(&dataset, &dataset, 20, 1, SubsetSelection::FirstN, 128).unwrap();
        assert_eq!(full.len(), 20);

        // Seeded draws are reproducible and differ from FirstN in general.
        let (a, _) = make_subsets(&dataset, &dataset, 8, 4, SubsetSelection::Seeded(9), 128).unwrap();
        let (b, _) = make_subsets(&dataset, &dataset, 8, 4, SubsetSelection::Seeded(9), 128).unwrap();
        assert_eq!(a.members(), b.members());

        // Oversized requests are parameter errors.
        assert!(make_subsets(&dataset, &dataset, 21, 1, SubsetSelection::FirstN, 128).is_err());
    }

    proptest! {
        #[test]
        fn idx_round_trip_is_exact(
            count in 0usize..6,
            rows in 1usize..5,
            cols in 1usize..5,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let images: Vec<GrayImage> = (0..count)
                .map(|_| {
                    let pixels = (0..rows * cols).map(|_| rng.random()).collect();
                    GrayImage::new(cols, rows, pixels).unwrap()
                })
                .collect();
            let labels: Vec<u8> = (0..count).map(|_| rng.random_range(0..=9)).collect();

            let image_bytes = write_idx_images(&images).unwrap();
            let label_bytes = write_idx_labels(&labels).unwrap();
            prop_assert_eq!(parse_idx_images(&image_bytes).unwrap(), images);
            prop_assert_eq!(parse_idx_labels(&label_bytes).unwrap(), labels);
            // Write -> parse -> write is byte-identical.
            prop_assert_eq!(
                write_idx_images(&parse_idx_images(&image_bytes).unwrap()).unwrap(),
                image_bytes
            );
        }

        #[test]
        fn binarize_monotone_in_threshold(
            pixels in proptest::collection::vec(any::<u8>(), 1..32),
            low in any::<u8>(),
            high in any::<u8>(),
        ) {
            let (low, high) = (low.min(high), low.max(high));
            let image = GrayImage::new(pixels.len(), 1, pixels).unwrap();
            let at_low = binarize(&image, low);
            let at_high = binarize(&image, high);
            // Raising the threshold never turns a 0 bit into 1.
            for k in 0..at_low.len() {
                prop_assert!(!(at_high.get(k) && !at_low.get(k)));
            }
        }
    }
}
