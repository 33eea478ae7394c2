//! CSV emission of run outputs. Columns follow FORMATS.md exactly; all
//! floats use Rust's shortest round-trip formatting so identical runs
//! produce byte-identical files.

use std::io::{self, Write};

use crate::engine::{synthetic_cycle_time, CostParams, ExchangeEvent, MetricsRecord, ProxyMatrix};
use crate::partition::Scheme;

/// Per-(rank, cycle) metrics rows.
///
/// Columns: `run_id,scheme,rank,cycle,n_updates,n_deliveries_intra,
/// n_deliveries_inter,n_irregular_intra,n_irregular_inter,n_collocated,
/// proxy_time`. The `_intra`/`_inter` pairs are the short/long pathway
/// buckets; a conventional run reports everything under `_intra`.
pub fn write_metrics_csv<W: Write>(
    w: &mut W,
    run_id: &str,
    scheme: Scheme,
    records: &[MetricsRecord],
    costs: &CostParams,
) -> io::Result<()> {
    writeln!(
        w,
        "run_id,scheme,rank,cycle,n_updates,n_deliveries_intra,n_deliveries_inter,\
         n_irregular_intra,n_irregular_inter,n_collocated,proxy_time"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            run_id,
            scheme.as_str(),
            r.rank,
            r.cycle,
            r.n_updates,
            r.n_deliveries[0],
            r.n_deliveries[1],
            r.n_irregular[0],
            r.n_irregular[1],
            r.n_collocated.iter().sum::<u64>(),
            synthetic_cycle_time(r, costs),
        )?;
    }
    Ok(())
}

/// Exchange events. Columns: `run_id,scheme,cycle,class,bytes,resize_rounds`.
pub fn write_exchange_csv<W: Write>(
    w: &mut W,
    run_id: &str,
    scheme: Scheme,
    events: &[ExchangeEvent],
) -> io::Result<()> {
    writeln!(w, "run_id,scheme,cycle,class,bytes,resize_rounds")?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            run_id,
            scheme.as_str(),
            e.cycle,
            e.class.as_str(),
            e.bytes,
            e.resize_rounds,
        )?;
    }
    Ok(())
}

/// Dense proxy matrix, rows = ranks, columns = cycles. A leading comment
/// line carries the global-exchange boundary cycles so plots can mark them.
pub fn write_matrix_dense_csv<W: Write>(
    w: &mut W,
    matrix: &ProxyMatrix,
    exchange_boundary_cycles: &[u64],
) -> io::Result<()> {
    write!(w, "# global_exchange_cycles=")?;
    for (i, c) in exchange_boundary_cycles.iter().enumerate() {
        if i > 0 {
            write!(w, ";")?;
        }
        write!(w, "{c}")?;
    }
    writeln!(w)?;
    write!(w, "rank")?;
    for c in 0..matrix.n_cycles {
        write!(w, ",cycle_{c}")?;
    }
    writeln!(w)?;
    for rank in 0..matrix.n_ranks {
        write!(w, "{rank}")?;
        for v in matrix.row(rank) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Long-format companion of the dense matrix: `rank,cycle,value`.
pub fn write_matrix_long_csv<W: Write>(w: &mut W, matrix: &ProxyMatrix) -> io::Result<()> {
    writeln!(w, "rank,cycle,value")?;
    for rank in 0..matrix.n_ranks {
        for (cycle, v) in matrix.row(rank).iter().enumerate() {
            writeln!(w, "{rank},{cycle},{v}")?;
        }
    }
    Ok(())
}
