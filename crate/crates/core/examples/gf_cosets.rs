//! Solve `Au = a` over GF(3) and walk the coset in lexicographic order.

use hashprop::gf::{solve_affine, CosetSpec, FieldMatrix};

fn main() -> hashprop::Result<()> {
    let a = FieldMatrix::from_dense(3, &[vec![1, 2, 0, 1], vec![0, 1, 1, 2]])?;
    let (rank, image) = a.rank_and_image_size();
    println!("A over GF(3): rank {rank}, |Im A| = {image}");

    let syndrome = a.matvec(&[2, 0, 1, 0])?;
    let coset = solve_affine(&CosetSpec::new(a.clone(), syndrome.clone())?);
    println!("C_A({syndrome:?}) has {} members (dimension {}):", coset.size(), coset.dimension());
    for u in coset.iter() {
        assert_eq!(a.matvec(&u)?, syndrome);
        println!("  {u:?}");
    }

    // a syndrome outside the image gives an empty coset
    let wide = FieldMatrix::from_dense(3, &[vec![1, 1], vec![2, 2]])?;
    let empty = solve_affine(&CosetSpec::new(wide, vec![1, 0])?);
    println!("inconsistent system: empty = {}", empty.is_empty());
    Ok(())
}
