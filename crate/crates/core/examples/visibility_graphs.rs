//! Visibility and invisibility graphs of a short series.

use vgval::visibility::{degree_histogram, degrees, ivg_build, vg_build, IvgMode};

fn main() -> vgval::Result<()> {
    let y = [3.0, 1.0, 2.5, 0.5, 4.0, 2.0, 2.2, 1.0];
    let vg = vg_build(&y)?;
    let literal = ivg_build(&y, IvgMode::Literal)?;
    let complement = ivg_build(&y, IvgMode::Complement)?;

    println!("series {y:?}");
    println!("VG edges ({}): {:?}", vg.edge_count(), vg.edges().collect::<Vec<_>>());
    println!("IVG literal ({}): {:?}", literal.edge_count(), literal.edges().collect::<Vec<_>>());
    println!("IVG complement ({}): {:?}", complement.edge_count(), complement.edges().collect::<Vec<_>>());

    let d = degrees(&vg);
    println!("VG degrees {:?}, mean {:.3}", d.per_node, d.mean);
    println!("VG degree histogram {:?}", degree_histogram(&d.per_node)?.counts());

    let shifted: Vec<f64> = y.iter().map(|v| 2.5 * v - 7.0).collect();
    println!("affine image has the same VG: {}", vg_build(&shifted)? == vg);

    println!("edge list (1-based):");
    vg.write_edge_list(std::io::stdout())?;
    Ok(())
}
