//! Regenerates `data/tw2.csv`: `cargo run --release --example generate_tw_table -- data/tw2.csv`.

use rmt_inference::spike::painleve::{generate_tw_table, TableConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/tw2.csv".into());
    let table = generate_tw_table(&TableConfig::default())?;
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!(
        "{} rows; mean {:.9}, variance {:.9}, q95 {:.6}",
        table.grid().len(),
        table.mean(),
        table.variance(),
        table.quantile(0.95)?
    );
    Ok(())
}
