//! Domain-coloured amplitude grids as binary PPM (P6).
//!
//! Hue follows the argument with `+1` at 0° (red), `i` at 90°, `−1` at 180°
//! (cyan) and `−i` at 270°; value is `min(|z|, 1)`; saturation is 1.

use std::io::Write;
use std::path::Path;

use crate::qca::Trajectory;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB pixels.
    pub pixels: Vec<[u8; 3]>,
}

impl PpmImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

fn channel(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn domain_color(z: C64) -> [u8; 3] {
    let value = z.norm().min(1.0);
    if value == 0.0 || !value.is_finite() {
        return [0, 0, 0];
    }
    let hue = z.arg().to_degrees().rem_euclid(360.0);
    let sector = hue / 60.0;
    let x = value * (1.0 - (sector % 2.0 - 1.0).abs());
    let (r, g, b) = match sector as u32 {
        0 => (value, x, 0.0),
        1 => (x, value, 0.0),
        2 => (0.0, value, x),
        3 => (0.0, x, value),
        4 => (x, 0.0, value),
        _ => (value, 0.0, x),
    };
    [channel(r), channel(g), channel(b)]
}

/// One pixel per (step, basis state); row `t` holds step `t`.
pub fn amplitude_grid(traj: &Trajectory) -> PpmImage {
    let width = traj.states[0].dim();
    let pixels = traj
        .states
        .iter()
        .flat_map(|s| {
            s.amplitudes()
                .iter()
                .map(|&z| domain_color(z))
                .collect::<Vec<_>>()
        })
        .collect();
    PpmImage {
        width,
        height: traj.states.len(),
        pixels,
    }
}

pub fn write_ppm(image: &PpmImage, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&image.to_bytes())?;
    Ok(())
}

pub fn render_amplitude_grid(traj: &Trajectory, path: &Path) -> Result<PpmImage> {
    if traj.states.is_empty() {
        return Err(Error::TrajectoryTooShort("nothing to render".into()));
    }
    let image = amplitude_grid(traj);
    write_ppm(&image, path)?;
    Ok(image)
}

/// Legend anchors in display order: `i`, `−i`, `0`, `1`, `−1`.
pub const LEGEND_ANCHORS: [C64; 5] = [
    C64::new(0.0, 1.0),
    C64::new(0.0, -1.0),
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(-1.0, 0.0),
];

/// A strip of the five anchor colours, each as a `block × block` square.
pub fn render_legend(block: usize) -> PpmImage {
    let block = block.max(1);
    let width = block * LEGEND_ANCHORS.len();
    let mut pixels = Vec::with_capacity(width * block);
    for _ in 0..block {
        for z in LEGEND_ANCHORS {
            pixels.extend(std::iter::repeat_n(domain_color(z), block));
        }
    }
    PpmImage {
        width,
        height: block,
        pixels,
    }
}
