//! Image quality triage and segmentation-derived features.

mod features;
mod quality;
mod table;

pub use features::{
    aggregate_angles, aggregate_buffer, corrupt_label_map_road_inflation, label_ratios,
    mean_vectors, AngleStrategy,
};
pub use quality::{
    assess_quality, color_distortion_score, exposure_fractions, laplace_variance,
    QualityReport, QualityThresholds, QualityVerdict,
};
pub use table::{
    build_feature_row, AngleObservation, BufferWeighting, FeatureRow, PointImages,
    QualityHandling, FEATURE_CSV_HEADER,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 19 streetscape classes, in the fixed label-map id order.
pub const CLASS_NAMES: [&str; 19] = [
    "terrain",
    "vegetation",
    "sky",
    "wall",
    "building",
    "road",
    "traffic_sign",
    "traffic_light",
    "sidewalk",
    "fence",
    "pole",
    "bus",
    "train",
    "truck",
    "car",
    "bicycle",
    "motorcycle",
    "rider",
    "person",
];

pub const NUM_CLASSES: usize = 19;
pub const VOID_LABEL: u8 = 255;

pub fn class_index(name: &str) -> Option<usize> {
    CLASS_NAMES.iter().position(|&c| c == name)
}

/// Feature groups and their class members (summation order is fixed so the
/// group decomposition is bit-exact).
pub const GROUP_NAMES: [&str; 4] = ["vehicles", "network", "human", "nature"];
pub const GROUP_VEHICLES: [usize; 4] = [11, 14, 13, 16]; // bus, car, truck, motorcycle
pub const GROUP_NETWORK: [usize; 6] = [5, 8, 7, 6, 10, 12]; // road, sidewalk, light, sign, pole, train
pub const GROUP_HUMAN: [usize; 6] = [4, 3, 9, 17, 15, 18]; // building, wall, fence, rider, bicycle, person
pub const GROUP_NATURE: [usize; 3] = [1, 2, 0]; // vegetation, sky, terrain

pub fn group_members(group: usize) -> &'static [usize] {
    match group {
        0 => &GROUP_VEHICLES,
        1 => &GROUP_NETWORK,
        2 => &GROUP_HUMAN,
        3 => &GROUP_NATURE,
        _ => panic!("group index out of range"),
    }
}

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image {width}x{height} is smaller than the 3x3 kernel")]
    TooSmall { width: u32, height: u32 },
    #[error("empty segmentation: label map has no non-void pixels")]
    EmptySegmentation,
    #[error("invalid class id {id} at pixel {index}")]
    InvalidClassId { id: u8, index: usize },
    #[error("angle {0}° not present at this point")]
    MissingAngle(u16),
    #[error("no feature vectors to aggregate")]
    NoVectors,
    #[error("zero contributing points after quality filtering")]
    NoContributingPoints,
    #[error("image decode failed: {0}")]
    Decode(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    /// len = width*height*3
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width * height > 0, "empty image");
        RgbImage {
            width,
            height,
            data: vec![0; (width * height * 3) as usize],
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for px in img.data.chunks_exact_mut(3) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImagingError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| ImagingError::Decode(e.to_string()))?
            .to_rgb8();
        Ok(RgbImage {
            width: img.width(),
            height: img.height(),
            data: img.into_raw(),
        })
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("consistent buffer");
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .expect("png encode");
        bytes
    }

    pub fn load_png(path: &std::path::Path) -> Result<Self, ImagingError> {
        Self::decode_png(&std::fs::read(path)?)
    }

    pub fn save_png(&self, path: &std::path::Path) -> Result<(), ImagingError> {
        Ok(std::fs::write(path, self.encode_png())?)
    }
}

/// Row-major 8-bit class-id raster; 255 is void.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        assert!(width * height > 0, "empty label map");
        LabelMap {
            width,
            height,
            data: vec![fill; (width * height) as usize],
        }
    }

    pub fn from_ids(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), (width * height) as usize);
        LabelMap {
            width,
            height,
            data,
        }
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImagingError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| ImagingError::Decode(e.to_string()))?
            .to_luma8();
        Ok(LabelMap {
            width: img.width(),
            height: img.height(),
            data: img.into_raw(),
        })
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let img = image::GrayImage::from_raw(self.width, self.height, self.data.clone())
            .expect("consistent buffer");
        let mut bytes = Vec::new();
        img.write_to(
            &mut std::io::Cursor::new(&mut bytes),
            image::ImageFormat::Png,
        )
        .expect("png encode");
        bytes
    }

    pub fn load_png(path: &std::path::Path) -> Result<Self, ImagingError> {
        Self::decode_png(&std::fs::read(path)?)
    }

    pub fn save_png(&self, path: &std::path::Path) -> Result<(), ImagingError> {
        Ok(std::fs::write(path, self.encode_png())?)
    }
}

/// Class ratios over the non-void pixels plus the four group rollups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub ratios: [f64; NUM_CLASSES],
}

impl FeatureVector {
    pub fn zeros() -> Self {
        FeatureVector {
            ratios: [0.0; NUM_CLASSES],
        }
    }

    /// Group ratio: the sum of its members in fixed order, so the
    /// decomposition is exact by construction.
    pub fn group_ratio(&self, group: usize) -> f64 {
        group_members(group).iter().map(|&c| self.ratios[c]).sum()
    }

    pub fn class_sum(&self) -> f64 {
        self.ratios.iter().sum()
    }

    /// The 23-wide row: 19 class ratios then the 4 group ratios.
    pub fn as_row(&self) -> Vec<f64> {
        let mut row = self.ratios.to_vec();
        for g in 0..4 {
            row.push(self.group_ratio(g));
        }
        row
    }
}

/// Column names matching [`FeatureVector::as_row`].
pub fn feature_column_names() -> Vec<String> {
    CLASS_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(GROUP_NAMES.iter().map(|s| s.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_cover_all_classes_once() {
        let mut seen = [false; NUM_CLASSES];
        for g in 0..4 {
            for &c in group_members(g) {
                assert!(!seen[c], "class {c} in two groups");
                seen[c] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn png_round_trips() {
        let mut img = RgbImage::new(4, 3);
        img.set_pixel(2, 1, [1, 2, 3]);
        assert_eq!(RgbImage::decode_png(&img.encode_png()).unwrap(), img);

        let map = LabelMap::from_ids(2, 2, vec![5, 5, 2, 255]);
        assert_eq!(LabelMap::decode_png(&map.encode_png()).unwrap(), map);
    }
}
