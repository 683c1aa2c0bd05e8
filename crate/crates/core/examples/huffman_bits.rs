//! Canonical Huffman coding of a residual stream: code table, entropy bound,
//! and a bit-exact encode/decode round trip.
//!
//!     cargo run --example huffman_bits

use mvpred::entropy_coding::{build_huffman, code_cost, decode_stream, encode_stream, entropy, histogram};

fn main() -> mvpred::Result<()> {
    let residuals = [0, 0, 0, 1, -1, 0, 2, 0, -1, 0, 0, 5, 1, 0, -2, 0, 0, 1, 0, -1];
    let hist = histogram(&residuals)?;
    let table = build_huffman(&hist);

    println!("symbol  count  code");
    for (symbol, cw) in table.entries() {
        let code: String = (0..cw.len).rev().map(|i| if cw.bits >> i & 1 == 1 { '1' } else { '0' }).collect();
        println!("{symbol:>6}  {:>5}  {code}", hist.count(*symbol));
    }

    let bits = code_cost(&hist, &table)?;
    let h = entropy(&hist);
    println!("\nentropy {h:.4} bits/symbol, code {:.4} bits/symbol, Kraft sum {}", bits as f64 / residuals.len() as f64, table.kraft_sum());

    let stream = encode_stream(&residuals, &table)?;
    let back = decode_stream(&stream, &table)?;
    assert_eq!(back, residuals);
    println!("{} symbols -> {} bits -> decoded identically", residuals.len(), stream.len());
    Ok(())
}
