//! Generate a planted instance and write it in the text formats the CLI reads.

use wasserstein_align::{exact_diameter, generate_planted, load_pointset};

fn main() -> wasserstein_align::Result<()> {
    let inst = generate_planted(200, 8, 2, 0.0, 0.1, 12)?;
    println!("a: {} points in R^{}, diameter {:.3}", inst.a.len(), inst.a.dim(), exact_diameter(&inst.a));
    println!("b: {} points, {} outliers", inst.b.len(), inst.outliers.len());

    let dir = std::env::temp_dir().join("walign-planted");
    std::fs::create_dir_all(&dir).map_err(|source| wasserstein_align::AlignError::File { path: dir.clone(), source })?;
    inst.a.save(dir.join("a.pts"))?;
    inst.b.save(dir.join("b.pts"))?;
    let back = load_pointset(dir.join("a.pts"))?;
    println!("wrote {} (round trip exact: {})", dir.display(), back == inst.a);
    Ok(())
}
