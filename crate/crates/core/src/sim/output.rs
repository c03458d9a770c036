use std::io::Write;

use super::engine::{Admission, Observer, PacketRecord, Simulator};
use super::spec::ScenarioSpec;
use super::SimError;

/// Everything recorded during one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Delivered packets in id order.
    pub packets: Vec<PacketRecord>,
    /// `(t, W)` at every window change, starting with the initial window.
    pub cwnd_series: Vec<(f64, f64)>,
    /// Bottleneck occupancy (packets, including the one in service) seen at
    /// every network entry.
    pub queue_series: Vec<(f64, u64)>,
    /// Sender state at every first transmission.
    pub admissions: Vec<Admission>,
    pub dropped_count: u64,
    pub marked_count: u64,
    pub warmup: f64,
    pub duration: f64,
    pub mss: f64,
}

#[derive(Default)]
struct Recorder {
    packets: Vec<PacketRecord>,
    cwnd: Vec<(f64, f64)>,
    queue: Vec<(f64, u64)>,
    admissions: Vec<Admission>,
}

impl Observer for Recorder {
    fn on_delivery(&mut self, record: &PacketRecord) -> bool {
        self.packets.push(*record);
        true
    }

    fn on_window(&mut self, t: f64, window_bits: f64) {
        self.cwnd.push((t, window_bits));
    }

    fn on_queue(&mut self, t: f64, occupancy: u64) {
        self.queue.push((t, occupancy));
    }

    fn on_admission(&mut self, admission: &Admission) {
        self.admissions.push(*admission);
    }
}

/// Runs the scenario for its duration, then stops creating data and lets every
/// created packet reach the receiver.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<SimOutput, SimError> {
    let mut sim = Simulator::new(spec)?;
    sim.stop_creation_at(spec.duration_s);
    let mut rec = Recorder::default();
    sim.run_until(f64::INFINITY, &mut rec);
    if rec.packets.len() as u64 != sim.created_count() {
        return Err(SimError::Invariant(format!(
            "{} packets created but {} delivered",
            sim.created_count(),
            rec.packets.len()
        )));
    }
    Ok(SimOutput {
        packets: rec.packets,
        cwnd_series: rec.cwnd,
        queue_series: rec.queue,
        admissions: rec.admissions,
        dropped_count: sim.dropped_count(),
        marked_count: sim.marked_count(),
        warmup: spec.warmup(),
        duration: spec.duration_s,
        mss: spec.mss_bits,
    })
}

impl SimOutput {
    /// Packets created after the warmup period.
    pub fn steady_state(&self) -> impl Iterator<Item = &PacketRecord> {
        self.packets.iter().filter(move |p| p.t1 >= self.warmup)
    }

    /// Delivered bits per second between the end of warmup and the end of the run.
    pub fn delivered_rate(&self) -> f64 {
        let n = self
            .packets
            .iter()
            .filter(|p| p.t4 >= self.warmup && p.t4 < self.duration)
            .count();
        n as f64 * self.mss / (self.duration - self.warmup)
    }

    /// `packets.csv`: `id,t1,t2,t3,t4,signaled,retx`.
    pub fn write_packets_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "t1", "t2", "t3", "t4", "signaled", "retx"])?;
        for p in &self.packets {
            w.write_record([
                p.id.to_string(),
                p.t1.to_string(),
                p.t2.to_string(),
                p.t3.to_string(),
                p.t4.to_string(),
                u8::from(p.signaled).to_string(),
                p.retransmissions.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `cwnd.csv`: `t_seconds,w_bits`.
    pub fn write_cwnd_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        crate::calculus::write_two_column_csv(out, ["t_seconds", "w_bits"], &self.cwnd_series)
    }
}
