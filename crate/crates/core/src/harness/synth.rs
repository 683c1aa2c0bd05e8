//! Deterministic synthetic sequences.
//!
//! Textures are hashed from integer coordinates, so every frame can be rendered
//! on its own. A pan velocity `v` moves the camera by `v` pels per frame: the
//! block matcher then reports `v` for background blocks. Object velocities use
//! the same convention. Velocities may be fractional; layer offsets are rounded
//! to whole pels per frame, so textures stay sharp and a stride of `k` frames
//! sees a displacement of about `k·v`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::{write_y4m, LumaFrame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// Textured background moving at `pan`.
    Pan,
    /// Panning background plus textured rectangles with their own velocities.
    MultiObject,
    /// Flat grey plus per-frame noise: nothing to track.
    Noise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Camera motion per frame; drawn uniformly from `±max_speed` when absent.
    pub pan: Option<(f64, f64)>,
    pub objects: usize,
    /// Side lengths are drawn uniformly from this inclusive range.
    pub object_size: (usize, usize),
    /// One side of each object, picked at random, is then multiplied by a
    /// factor drawn from `1..=elongation`, giving bar-like shapes.
    pub elongation: u32,
    /// Bound on each velocity component, per frame.
    pub max_speed: f64,
    /// Texture samples span `128 ± texture_amplitude`.
    pub texture_amplitude: u8,
    /// Standard deviation of additive Gaussian noise, redrawn per frame.
    pub noise_sigma: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            width: 128,
            height: 96,
            frames: 10,
            pan: Some((2.0, 0.0)),
            objects: 0,
            object_size: (16, 32),
            elongation: 1,
            max_speed: 4.0,
            texture_amplitude: 60,
            noise_sigma: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Object {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    vx: f64,
    vy: f64,
    texture: u64,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn texel(layer: u64, x: i64, y: i64, amplitude: u8) -> f64 {
    let h = mix(layer ^ mix((x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (y as u64)));
    let span = 2 * amplitude as u64 + 1;
    128.0 - amplitude as f64 + (h % span) as f64
}

fn check(params: &SynthParams) -> Result<()> {
    if params.width == 0 || params.height == 0 || params.frames == 0 {
        return Err(Error::Config("synthetic sequence needs non-zero width, height and frame count".into()));
    }
    if params.width % 2 != 0 || params.height % 2 != 0 {
        return Err(Error::Config("synthetic sequence dimensions must be even for 4:2:0 output".into()));
    }
    if params.object_size.0 == 0 || params.object_size.0 > params.object_size.1 {
        return Err(Error::Config(format!("invalid object size range {:?}", params.object_size)));
    }
    if !(params.max_speed >= 0.0) || !(params.noise_sigma >= 0.0) {
        return Err(Error::Config("speed bound and noise sigma must be non-negative".into()));
    }
    Ok(())
}

/// Renders the sequence in memory.
pub fn synth_frames(kind: SynthKind, params: &SynthParams, seed: u64) -> Result<Vec<LumaFrame>> {
    check(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = params.max_speed;
    let pan = match (kind, params.pan) {
        (SynthKind::Noise, _) => (0.0, 0.0),
        (_, Some(p)) => p,
        (_, None) => (rng.random_range(-s..=s), rng.random_range(-s..=s)),
    };
    let background = rng.random::<u64>();
    let objects: Vec<Object> = if kind == SynthKind::MultiObject {
        (0..params.objects)
            .map(|_| {
                let mut o = Object {
                    x: rng.random_range(0..params.width as i64),
                    y: rng.random_range(0..params.height as i64),
                    w: rng.random_range(params.object_size.0..=params.object_size.1) as i64,
                    h: rng.random_range(params.object_size.0..=params.object_size.1) as i64,
                    vx: rng.random_range(-s..=s),
                    vy: rng.random_range(-s..=s),
                    texture: rng.random(),
                };
                let stretch = rng.random_range(1..=params.elongation.max(1)) as i64;
                if rng.random::<bool>() {
                    o.w *= stretch;
                } else {
                    o.h *= stretch;
                }
                o
            })
            .collect()
    } else {
        Vec::new()
    };
    let noise = Normal::new(0.0, params.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let (w, h) = (params.width as i64, params.height as i64);

    let mut frames = Vec::with_capacity(params.frames);
    for t in 0..params.frames {
        let offset = |v: f64| (v * t as f64).round() as i64;
        let t = t as i64;
        let mut plane = vec![0.0f64; params.width * params.height];
        if kind != SynthKind::Noise {
            let (px, py) = (offset(pan.0), offset(pan.1));
            for y in 0..h {
                for x in 0..w {
                    plane[(y * w + x) as usize] = texel(background, x + px, y + py, params.texture_amplitude);
                }
            }
        } else {
            plane.iter_mut().for_each(|v| *v = 128.0);
        }
        // Later objects are drawn on top. Positions wrap around the frame.
        for o in &objects {
            let (ox, oy) = (o.x - offset(o.vx), o.y - offset(o.vy));
            for ly in 0..o.h {
                for lx in 0..o.w {
                    let (x, y) = ((ox + lx).rem_euclid(w), (oy + ly).rem_euclid(h));
                    plane[(y * w + x) as usize] = texel(o.texture, lx, ly, params.texture_amplitude);
                }
            }
        }
        let samples = plane
            .into_iter()
            .map(|v| {
                let v = if params.noise_sigma > 0.0 { v + noise.sample(&mut rng) } else { v };
                v.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        frames.push(LumaFrame::new(params.width, params.height, t as usize, samples)?);
    }
    Ok(frames)
}

/// Renders the sequence and writes it as 4:2:0 Y4M with neutral chroma.
pub fn synth_generate(kind: SynthKind, params: &SynthParams, seed: u64, path: impl AsRef<Path>) -> Result<()> {
    let frames = synth_frames(kind, params, seed)?;
    write_y4m(path, &frames, (25, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion_field::{classify_blocks, estimate_sequence, MotionVector};

    #[test]
    fn pan_is_recovered() {
        let params = SynthParams::default();
        let frames = synth_frames(SynthKind::Pan, &params, 1).unwrap();
        assert_eq!(frames.len(), 10);
        let fields = estimate_sequence(frames.into_iter().map(Ok), 1, 16, 8).unwrap();
        assert_eq!(fields.len(), 9);
        for f in &fields {
            for r in 1..f.rows - 1 {
                for c in 1..f.cols - 1 {
                    assert_eq!(f.block(c, r).mv, Some(MotionVector::new(2, 0)));
                }
            }
        }
    }

    #[test]
    fn flat_noise_is_intra() {
        let params = SynthParams {
            noise_sigma: 12.0,
            ..SynthParams::default()
        };
        let frames = synth_frames(SynthKind::Noise, &params, 2).unwrap();
        let fields = estimate_sequence(frames.into_iter().map(Ok), 1, 16, 4).unwrap();
        let field = classify_blocks(fields[0].clone(), 6.0);
        let intra = field.blocks.iter().filter(|b| !b.is_mc()).count();
        assert!(intra * 10 >= field.blocks.len() * 9, "{intra} of {}", field.blocks.len());
    }

    #[test]
    fn seeded_and_deterministic() {
        let params = SynthParams {
            objects: 5,
            pan: None,
            noise_sigma: 1.5,
            ..SynthParams::default()
        };
        let a = synth_frames(SynthKind::MultiObject, &params, 3).unwrap();
        assert_eq!(a, synth_frames(SynthKind::MultiObject, &params, 3).unwrap());
        assert_ne!(a, synth_frames(SynthKind::MultiObject, &params, 4).unwrap());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let odd = SynthParams {
            width: 15,
            ..SynthParams::default()
        };
        assert!(matches!(synth_frames(SynthKind::Pan, &odd, 0), Err(Error::Config(_))));
        let sizes = SynthParams {
            object_size: (9, 3),
            ..SynthParams::default()
        };
        assert!(synth_frames(SynthKind::MultiObject, &sizes, 0).is_err());
    }
}
