//! Low-quality image detection: blur, exposure, color channel distortion.

use super::{ImagingError, RgbImage};
use serde::{Deserialize, Serialize};

/// Detection thresholds. Defaults follow common image-forensics practice and
/// are all configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityThresholds {
    /// Laplacian variance below this is blurry.
    pub blur_var_min: f64,
    /// HSV value at or above this counts as an overexposed pixel.
    pub over_v: f64,
    /// HSV value at or below this counts as an underexposed pixel.
    pub under_v: f64,
    /// Image is flagged when the pixel fraction strictly exceeds this.
    pub exposure_fraction: f64,
    /// Distortion score strictly above this is flagged.
    pub distortion_max: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            blur_var_min: 100.0,
            over_v: 0.95,
            under_v: 0.10,
            exposure_fraction: 0.5,
            distortion_max: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityVerdict {
    Ok,
    Blur,
    Overexposure,
    Underexposure,
    ColorDistortion,
}

impl QualityVerdict {
    pub fn name(self) -> &'static str {
        match self {
            QualityVerdict::Ok => "ok",
            QualityVerdict::Blur => "blur",
            QualityVerdict::Overexposure => "overexposure",
            QualityVerdict::Underexposure => "underexposure",
            QualityVerdict::ColorDistortion => "color_distortion",
        }
    }

    pub fn is_low_quality(self) -> bool {
        self != QualityVerdict::Ok
    }
}

impl std::str::FromStr for QualityVerdict {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ok" => QualityVerdict::Ok,
            "blur" => QualityVerdict::Blur,
            "overexposure" => QualityVerdict::Overexposure,
            "underexposure" => QualityVerdict::Underexposure,
            "color_distortion" => QualityVerdict::ColorDistortion,
            other => return Err(format!("unknown verdict {other:?}")),
        })
    }
}

/// Numeric detector outputs plus the first-failing-check verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub blur_var: f64,
    pub over_frac: f64,
    pub under_frac: f64,
    pub distortion: f64,
    pub verdict: QualityVerdict,
}

impl QualityReport {
    /// Re-derive the verdict from the stored numbers; must agree with
    /// `verdict` for any report this module produced.
    pub fn recompute_verdict(&self, t: &QualityThresholds) -> QualityVerdict {
        verdict_from(
            self.blur_var,
            self.over_frac,
            self.under_frac,
            self.distortion,
            t,
        )
    }
}

fn verdict_from(
    blur_var: f64,
    over_frac: f64,
    under_frac: f64,
    distortion: f64,
    t: &QualityThresholds,
) -> QualityVerdict {
    if blur_var < t.blur_var_min {
        QualityVerdict::Blur
    } else if over_frac > t.exposure_fraction {
        QualityVerdict::Overexposure
    } else if under_frac > t.exposure_fraction {
        QualityVerdict::Underexposure
    } else if distortion > t.distortion_max {
        QualityVerdict::ColorDistortion
    } else {
        QualityVerdict::Ok
    }
}

/// Population variance of the 3x3 Laplacian response over the grayscale
/// interior. Low variance means few edges, i.e. a blurry image.
pub fn laplace_variance(image: &RgbImage) -> Result<f64, ImagingError> {
    if image.width < 3 || image.height < 3 {
        return Err(ImagingError::TooSmall {
            width: image.width,
            height: image.height,
        });
    }
    let w = image.width as usize;
    let h = image.height as usize;
    let mut gray = vec![0.0f64; w * h];
    for (i, px) in image.data.chunks_exact(3).enumerate() {
        gray[i] = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
    }

    // Kernel [[0,1,0],[1,-4,1],[0,1,0]] over interior pixels.
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut responses = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let c = gray[y * w + x];
            let r = gray[(y - 1) * w + x] + gray[(y + 1) * w + x] + gray[y * w + x - 1]
                + gray[y * w + x + 1]
                - 4.0 * c;
            responses.push(r);
            sum += r;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    let var = responses.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / count as f64;
    Ok(var)
}

/// Fractions of overexposed and underexposed pixels.
///
/// V = max(R,G,B)/255 per pixel; a pixel is overexposed when V ≥ `over_v`
/// and underexposed when V ≤ `under_v`.
pub fn exposure_fractions(image: &RgbImage, over_v: f64, under_v: f64) -> (f64, f64) {
    let mut over = 0usize;
    let mut under = 0usize;
    let n = (image.width * image.height) as usize;
    for px in image.data.chunks_exact(3) {
        let v = px[0].max(px[1]).max(px[2]) as f64 / 255.0;
        if v >= over_v {
            over += 1;
        }
        if v <= under_v {
            under += 1;
        }
    }
    (over as f64 / n as f64, under as f64 / n as f64)
}

/// Color-channel distortion: one minus the smallest pairwise histogram
/// intersection of the normalized 256-bin channel histograms.
///
/// 0 for any grayscale image; 1 when some channel pair has disjoint
/// histograms.
pub fn color_distortion_score(image: &RgbImage) -> f64 {
    let mut hist = [[0u64; 256]; 3];
    for px in image.data.chunks_exact(3) {
        for c in 0..3 {
            hist[c][px[c] as usize] += 1;
        }
    }
    let n = (image.width * image.height) as f64;
    let intersection = |a: &[u64; 256], b: &[u64; 256]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| x.min(y) as f64 / n)
            .sum::<f64>()
    };
    let rg = intersection(&hist[0], &hist[1]);
    let rb = intersection(&hist[0], &hist[2]);
    let gb = intersection(&hist[1], &hist[2]);
    1.0 - rg.min(rb).min(gb)
}

/// Run every detector and report the first failing check in the fixed order
/// blur → overexposure → underexposure → color distortion.
pub fn assess_quality(
    image: &RgbImage,
    thresholds: &QualityThresholds,
) -> Result<QualityReport, ImagingError> {
    let blur_var = laplace_variance(image)?;
    let (over_frac, under_frac) = exposure_fractions(image, thresholds.over_v, thresholds.under_v);
    let distortion = color_distortion_score(image);
    Ok(QualityReport {
        blur_var,
        over_frac,
        under_frac,
        distortion,
        verdict: verdict_from(blur_var, over_frac, under_frac, distortion, thresholds),
    })
}
