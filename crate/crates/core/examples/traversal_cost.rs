//! Measured visits per retrieved page against (n/m + 1) / 2.

use ibag_search::eval::{closed_form_average_visits, traversal_cost_check};

fn main() -> ibag_search::Result<()> {
    println!("{:>3} {:>4} {:>9} {:>9}", "m", "L", "measured", "expected");
    for m in [1, 2, 4, 8, 10] {
        for l in [1, 10, 100] {
            let got = traversal_cost_check(m, l)?;
            println!("{m:>3} {l:>4} {got:>9.2} {:>9.2}", closed_form_average_visits(m * l, m));
        }
    }
    Ok(())
}
