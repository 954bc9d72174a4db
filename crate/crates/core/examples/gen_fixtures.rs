//! Regenerates the checked-in reference frame and its golden label map.
//!
//! cargo run --example gen_fixtures -- crates/core/tests/data

use std::fs;
use std::path::PathBuf;

use skintrack::scene::reference_frame;
use skintrack::{save_ppm, segment, Eta};

fn main() -> anyhow::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "tests/data".into())
        .into();
    fs::create_dir_all(&dir)?;
    let frame = reference_frame();
    fs::write(dir.join("reference.ppm"), save_ppm(&frame))?;
    let seg = segment(&frame, Eta::new(28)?);
    let mut csv = Vec::new();
    seg.write_csv(&mut csv)?;
    fs::write(dir.join("reference_labels_eta28.csv"), csv)?;
    println!("regions={}", seg.region_count());
    Ok(())
}
