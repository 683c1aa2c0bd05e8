//! Render a synthetic sequence, round-trip it through Y4M and run full-search
//! block matching over it. Pass a `.y4m` path to estimate a real clip instead.
//!
//!     cargo run --example synth_and_estimate [clip.y4m]

use mvpred::harness::{synth_generate, SynthKind, SynthParams};
use mvpred::motion_field::{classify_blocks, estimate_sequence};
use mvpred::video_io::open_y4m;

fn main() -> mvpred::Result<()> {
    let tmp = tempfile::tempdir()?;
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let params = SynthParams {
                width: 256,
                height: 192,
                objects: 4,
                pan: Some((3.0, -1.0)),
                ..SynthParams::default()
            };
            let p = tmp.path().join("synthetic.y4m");
            synth_generate(SynthKind::MultiObject, &params, 42, &p)?;
            p
        }
    };

    let reader = open_y4m(&path)?;
    let h = reader.header().clone();
    println!("{}: {}x{}", path.display(), h.width, h.height);

    let fields = estimate_sequence(reader, 1, 16, 16)?;
    for field in fields.into_iter().map(|f| classify_blocks(f, 6.0)).take(3) {
        let mut counts = std::collections::BTreeMap::new();
        for b in &field.blocks {
            *counts.entry(b.mv.map(|v| (v.dx, v.dy))).or_insert(0) += 1;
        }
        let mut common: Vec<_> = counts.into_iter().collect();
        common.sort_by_key(|(_, n)| std::cmp::Reverse(*n));
        println!("frame {}: {} blocks, most common vectors {:?}", field.frame_index, field.blocks.len(), &common[..common.len().min(4)]);
    }
    Ok(())
}
