//! Vertex enumeration of the single-position polytopes that replace the
//! indicator constraints.

use hashprop::lp_md::polytope_vertex_audit;

fn main() -> hashprop::Result<()> {
    for k in 1..=3 {
        for i in 0..1usize << k {
            let b: Vec<usize> = (0..k).map(|j| i >> (k - 1 - j) & 1).collect();
            let r = polytope_vertex_audit(&b)?;
            println!(
                "b = {b:?}: {} vertices, {} fractional, integral set matches: {}",
                r.vertices.len(),
                r.fractional.len(),
                r.integral == r.expected
            );
        }
    }
    let r = polytope_vertex_audit(&[0, 0])?;
    println!("S(0,0) = {:?}", r.integral);
    Ok(())
}
