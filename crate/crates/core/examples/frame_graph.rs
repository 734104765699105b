//! Builds the frame graph for a fixed six-level ranking and prints it as
//! DOT. Pipe through `dot -Tsvg` to draw it.

use arwa::{FrameGraph, Ranking};

fn main() -> arwa::Result<()> {
    let order = [(0, 1), (2, 3), (4, 5), (0, 4), (1, 3), (2, 4), (3, 4)];
    let g = FrameGraph::build(&Ranking::from_order(&order), 6)?;
    eprintln!("labels {:?}", g.frame_labels());
    eprintln!("dashed {:?}", g.dashed_edges().map(|e| (e.n, e.m)).collect::<Vec<_>>());
    print!("{}", g.export_dot());
    Ok(())
}
