//! Trace export: one row per packet with exact `n`/`d` columns and decimal
//! columns for display only.

use std::io::Write;

use serde::Serialize;

use super::RegulatorTrace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub index: usize,
    pub arrival_n: i128,
    pub arrival_d: i128,
    pub departure_n: i128,
    pub departure_d: i128,
    pub flow: u32,
    pub size_n: i128,
    pub size_d: i128,
    pub hol_wait_n: i128,
    pub hol_wait_d: i128,
    pub tokens_n: i128,
    pub tokens_d: i128,
    pub arrival: String,
    pub departure: String,
    pub hol_wait: String,
}

fn dec(x: crate::q::Q) -> String {
    format!("{:.6}", x.to_f64())
}

impl RegulatorTrace {
    pub fn rows(&self) -> Vec<TraceRow> {
        let waits = self.hol_waits();
        self.arrivals
            .packets()
            .iter()
            .zip(self.departures.packets())
            .enumerate()
            .map(|(k, (a, d))| TraceRow {
                index: k + 1,
                arrival_n: a.time.numer(),
                arrival_d: a.time.denom(),
                departure_n: d.time.numer(),
                departure_d: d.time.denom(),
                flow: a.flow.0,
                size_n: a.size.numer(),
                size_d: a.size.denom(),
                hol_wait_n: waits[k].numer(),
                hol_wait_d: waits[k].denom(),
                tokens_n: self.tokens[k].numer(),
                tokens_d: self.tokens[k].denom(),
                arrival: dec(a.time),
                departure: dec(d.time),
                hol_wait: dec(waits[k]),
            })
            .collect()
    }
}

pub fn trace_csv<W: Write>(trace: &RegulatorTrace, w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in trace.rows() {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn trace_json<W: Write>(trace: &RegulatorTrace, w: W) -> Result<(), serde_json::Error> {
    serde_json::to_writer_pretty(w, &trace.rows())
}
