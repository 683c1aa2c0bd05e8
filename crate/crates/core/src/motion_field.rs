//! Ground-truth motion vectors by exhaustive integer-pel block matching.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::LumaFrame;

/// Integer-pel displacement from a block in the current frame to its match in
/// the reference frame. Positive `dx` points right, positive `dy` points down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    /// Component by coordinate index: 0 is x, 1 is y.
    pub fn coord(self, axis: usize) -> i32 {
        if axis == 0 {
            self.dx
        } else {
            self.dy
        }
    }
}

impl std::ops::Mul<i32> for MotionVector {
    type Output = MotionVector;

    fn mul(self, k: i32) -> MotionVector {
        MotionVector::new(self.dx * k, self.dy * k)
    }
}

/// One block of a motion field. `mv` is `None` for blocks treated as intra
/// coded (not motion-compensated).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRecord {
    pub col: usize,
    pub row: usize,
    pub mv: Option<MotionVector>,
    pub sad: u32,
}

impl BlockRecord {
    pub fn is_mc(&self) -> bool {
        self.mv.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvField {
    pub frame_index: usize,
    pub block_size: usize,
    pub cols: usize,
    pub rows: usize,
    /// Row-major, `cols * rows` entries.
    pub blocks: Vec<BlockRecord>,
}

impl MvField {
    pub fn block(&self, col: usize, row: usize) -> &BlockRecord {
        &self.blocks[row * self.cols + col]
    }

    /// The motion vector at `(col, row)` if that block is motion-compensated.
    pub fn mv_at(&self, col: isize, row: isize) -> Option<MotionVector> {
        if col < 0 || row < 0 || col as usize >= self.cols || row as usize >= self.rows {
            return None;
        }
        self.block(col as usize, row as usize).mv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeConfig {
    pub block_size: usize,
    pub search_range: i32,
    pub sad_threshold_per_pel: f64,
}

impl Default for MeConfig {
    fn default() -> Self {
        Self {
            block_size: 16,
            search_range: 16,
            sad_threshold_per_pel: 6.0,
        }
    }
}

fn check_geometry(current: &LumaFrame, reference: &LumaFrame, block_size: usize, search_range: i32) -> Result<()> {
    if current.width() != reference.width() || current.height() != reference.height() {
        return Err(Error::Dimension(format!(
            "current {}x{} vs reference {}x{}",
            current.width(),
            current.height(),
            reference.width(),
            reference.height()
        )));
    }
    if ![4, 8, 16].contains(&block_size) {
        return Err(Error::Config(format!("block size {block_size} not in {{4, 8, 16}}")));
    }
    if block_size > current.width() || block_size > current.height() {
        return Err(Error::Config(format!(
            "block size {block_size} exceeds frame {}x{}",
            current.width(),
            current.height()
        )));
    }
    if search_range < 1 {
        return Err(Error::Config(format!("search range {search_range} < 1")));
    }
    Ok(())
}

/// SAD between the block at `(x0, y0)` in `a` and `(x1, y1)` in `b`, giving up
/// as soon as the partial sum exceeds `bail`.
#[inline]
fn block_sad(a: &LumaFrame, b: &LumaFrame, x0: usize, y0: usize, x1: usize, y1: usize, size: usize, bail: u32) -> u32 {
    let mut sum = 0u32;
    for r in 0..size {
        let ra = &a.row(y0 + r)[x0..x0 + size];
        let rb = &b.row(y1 + r)[x1..x1 + size];
        sum += ra.iter().zip(rb).map(|(&p, &q)| p.abs_diff(q) as u32).sum::<u32>();
        if sum > bail {
            return sum;
        }
    }
    sum
}

/// Tie-break order among equal-SAD candidates: smaller |dx|+|dy|, then dy, then dx.
#[inline]
fn candidate_key(mv: MotionVector) -> (i32, i32, i32) {
    (mv.dx.abs() + mv.dy.abs(), mv.dy, mv.dx)
}

fn search_block(current: &LumaFrame, reference: &LumaFrame, col: usize, row: usize, size: usize, range: i32) -> BlockRecord {
    let x = (col * size) as i32;
    let y = (row * size) as i32;
    let max_x = (current.width() - size) as i32;
    let max_y = (current.height() - size) as i32;

    // Seed with the zero vector so early termination has a tight bound.
    let mut best_mv = MotionVector::ZERO;
    let mut best_sad = block_sad(current, reference, x as usize, y as usize, x as usize, y as usize, size, u32::MAX);
    for dy in (-range).max(-y)..=range.min(max_y - y) {
        for dx in (-range).max(-x)..=range.min(max_x - x) {
            let mv = MotionVector::new(dx, dy);
            if mv.is_zero() {
                continue;
            }
            let sad = block_sad(
                current,
                reference,
                x as usize,
                y as usize,
                (x + dx) as usize,
                (y + dy) as usize,
                size,
                best_sad,
            );
            if sad < best_sad || (sad == best_sad && candidate_key(mv) < candidate_key(best_mv)) {
                best_sad = sad;
                best_mv = mv;
            }
        }
    }
    BlockRecord {
        col,
        row,
        mv: Some(best_mv),
        sad: best_sad,
    }
}

/// Exhaustive SAD search over `±search_range`, clipped so the reference block
/// stays inside the frame. Partial blocks on the right and bottom edges are
/// dropped. Every block of the result is marked motion-compensated.
pub fn full_search(current: &LumaFrame, reference: &LumaFrame, block_size: usize, search_range: i32) -> Result<MvField> {
    check_geometry(current, reference, block_size, search_range)?;
    let cols = current.width() / block_size;
    let rows = current.height() / block_size;
    let blocks = (0..cols * rows)
        .into_par_iter()
        .map(|i| search_block(current, reference, i % cols, i / cols, block_size, search_range))
        .collect();
    Ok(MvField {
        frame_index: current.index(),
        block_size,
        cols,
        rows,
        blocks,
    })
}

/// Marks blocks whose SAD exceeds `sad_threshold_per_pel * block_size²` as
/// intra (non motion-compensated) and drops their vectors.
pub fn classify_blocks(mut field: MvField, sad_threshold_per_pel: f64) -> MvField {
    let limit = sad_threshold_per_pel * (field.block_size * field.block_size) as f64;
    for block in &mut field.blocks {
        if block.sad as f64 > limit {
            block.mv = None;
        }
    }
    field
}

/// Motion fields between frames `k*stride` and `(k-1)*stride`, k ≥ 1. A stride
/// above one emulates fast-forward footage. Frames between the kept ones are
/// read and dropped; at most two frames are held at once.
pub fn estimate_sequence<I>(frames: I, stride: usize, block_size: usize, search_range: i32) -> Result<Vec<MvField>>
where
    I: IntoIterator<Item = Result<LumaFrame>>,
{
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let mut fields = Vec::new();
    let mut previous: Option<LumaFrame> = None;
    for (position, frame) in frames.into_iter().enumerate() {
        let frame = frame?;
        if position % stride != 0 {
            continue;
        }
        if let Some(reference) = &previous {
            fields.push(full_search(&frame, reference, block_size, search_range)?);
        }
        previous = Some(frame);
    }
    if fields.is_empty() {
        log::warn!("fewer than two usable frames at stride {stride}; no motion fields produced");
    }
    Ok(fields)
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    frame: usize,
    col: usize,
    row: usize,
    mc: u8,
    dx: Option<i32>,
    dy: Option<i32>,
    sad: u32,
}

/// CSV with header `frame,col,row,mc,dx,dy,sad`; `dx`/`dy` empty for intra blocks.
pub fn write_fields_csv<W: Write>(writer: W, fields: &[MvField]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for field in fields {
        for b in &field.blocks {
            out.serialize(FieldRow {
                frame: field.frame_index,
                col: b.col,
                row: b.row,
                mc: b.is_mc() as u8,
                dx: b.mv.map(|m| m.dx),
                dy: b.mv.map(|m| m.dy),
                sad: b.sad,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_fields_csv`]. The block size is not part of the format.
pub fn read_fields_csv<R: Read>(reader: R, block_size: usize) -> Result<Vec<MvField>> {
    let mut input = csv::Reader::from_reader(reader);
    let mut fields: Vec<MvField> = Vec::new();
    let mut pending: Vec<FieldRow> = Vec::new();
    let flush = |rows: &mut Vec<FieldRow>, fields: &mut Vec<MvField>| -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let cols = rows.iter().map(|r| r.col).max().unwrap_or(0) + 1;
        let nrows = rows.iter().map(|r| r.row).max().unwrap_or(0) + 1;
        if rows.len() != cols * nrows {
            return Err(Error::Dimension(format!(
                "frame {} has {} blocks for a {cols}x{nrows} grid",
                rows[0].frame,
                rows.len()
            )));
        }
        let mut blocks = vec![None; cols * nrows];
        for r in rows.drain(..) {
            let mv = match (r.mc, r.dx, r.dy) {
                (1, Some(dx), Some(dy)) => Some(MotionVector::new(dx, dy)),
                (0, _, _) => None,
                _ => return Err(Error::Dimension(format!("block ({}, {}) marked mc without a vector", r.col, r.row))),
            };
            blocks[r.row * cols + r.col] = Some(BlockRecord {
                col: r.col,
                row: r.row,
                mv,
                sad: r.sad,
            });
        }
        let frame_index = fields.len();
        let blocks: Option<Vec<_>> = blocks.into_iter().collect();
        let blocks = blocks.ok_or_else(|| Error::Dimension(format!("duplicate block in field {frame_index}")))?;
        fields.push(MvField {
            frame_index: 0,
            block_size,
            cols,
            rows: nrows,
            blocks,
        });
        Ok(())
    };
    let mut current_frame = None;
    let mut frame_ids = Vec::new();
    for row in input.deserialize() {
        let row: FieldRow = row?;
        if current_frame != Some(row.frame) {
            flush(&mut pending, &mut fields)?;
            current_frame = Some(row.frame);
            frame_ids.push(row.frame);
        }
        pending.push(row);
    }
    flush(&mut pending, &mut fields)?;
    for (field, id) in fields.iter_mut().zip(frame_ids) {
        field.frame_index = id;
    }
    Ok(fields)
}
