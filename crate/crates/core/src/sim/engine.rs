use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{
    DeliveryMode, IncreaseRule, ScenarioSpec, SignalProcess, SourceSpec, WindowControllerSpec,
};
use super::SimError;
use crate::calculus::CumulativeProcess;
use crate::rng::stream_seed;

/// Timestamps of one packet: application entry, admission to the network,
/// network exit and in-order delivery to the receiving application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    pub id: u64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub signaled: bool,
    pub retransmissions: u32,
}

/// Sender state at the moment a packet is first admitted to the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admission {
    pub t: f64,
    pub id: u64,
    /// Bits admitted so far, this packet included (first transmissions only).
    pub admitted_bits: f64,
    /// Bits created by the application so far.
    pub created_bits: f64,
    /// Bits whose acknowledgement has reached the sender.
    pub acked_bits: f64,
    pub window_bits: f64,
}

/// Callbacks invoked while the simulation runs. Returning `false` from
/// [`Observer::on_delivery`] pauses the run after the current event.
pub trait Observer {
    fn on_delivery(&mut self, _record: &PacketRecord) -> bool {
        true
    }
    fn on_window(&mut self, _t: f64, _window_bits: f64) {}
    fn on_queue(&mut self, _t: f64, _occupancy: u64) {}
    fn on_admission(&mut self, _admission: &Admission) {}
}

impl Observer for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// The requested end time was reached.
    ReachedTime,
    /// The observer asked to pause.
    Paused,
    /// No further events exist.
    Idle,
}

#[derive(Debug, Clone)]
enum Source {
    ConstantRate { rate: f64 },
    Greedy,
    Trace { process: CumulativeProcess, total: f64 },
}

#[derive(Debug, Clone)]
enum Controller {
    Static,
    Aimd {
        increase: IncreaseRule,
        decrease: f64,
        floor: f64,
    },
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    t1: f64,
    t2: f64,
    t3: f64,
    signaled: bool,
    retransmissions: u32,
}

#[derive(Debug, Clone, Copy)]
struct RxEvent {
    t: f64,
    id: u64,
    marked: bool,
    sent: f64,
}

#[derive(Debug, Clone, Copy)]
struct LossEvent {
    t: f64,
    id: u64,
    signal: bool,
    sent: f64,
}

/// Packet-level discrete-event model of one window flow-controlled connection.
///
/// The bottleneck is a FIFO server of rate `C` followed by a constant
/// propagation delay, so an unloaded packet needs exactly `fwd_delay_s` to
/// cross the network. ACKs are per packet and take `rev_delay_s` to return.
pub struct Simulator {
    mss: f64,
    fwd: f64,
    rev: f64,
    tx_time: f64,
    prop: f64,
    capacity_limited: bool,
    buffer: Option<u64>,
    source: Source,
    controller: Controller,
    signal: SignalProcess,
    mode: DeliveryMode,
    rng: ChaCha8Rng,

    now: f64,
    stop_creation_at: f64,
    next_id: u64,
    window: f64,
    last_decrease: f64,
    in_flight: u64,
    tx_count: u64,
    admitted: u64,
    acked: u64,

    /// Packets created but not yet delivered; `packets[0]` has id `base_id`.
    packets: VecDeque<InFlight>,
    base_id: u64,
    send_queue: VecDeque<u64>,
    retx_queue: VecDeque<u64>,
    link: VecDeque<f64>,
    last_finish: f64,
    rx_events: VecDeque<RxEvent>,
    ack_events: VecDeque<RxEvent>,
    loss_events: VecDeque<LossEvent>,
    out_of_order: BTreeSet<u64>,

    dropped: u64,
    marked: u64,
    paused: bool,
    started: bool,
}

impl Simulator {
    pub fn new(spec: &ScenarioSpec) -> Result<Self, SimError> {
        spec.validate()?;
        let mss = spec.mss_bits;
        let source = match &spec.source {
            SourceSpec::ConstantRate { rate_bps } => Source::ConstantRate { rate: *rate_bps },
            SourceSpec::Greedy => Source::Greedy,
            SourceSpec::Trace { breakpoints } => {
                let process = CumulativeProcess::new(breakpoints.clone())
                    .map_err(|e| SimError::InvalidInput(format!("trace: {e}")))?;
                let total = process.function().last_value();
                Source::Trace { process, total }
            }
            SourceSpec::TraceFile { .. } => unreachable!("rejected by validate"),
        };
        let (controller, window) = match spec.controller {
            WindowControllerSpec::Static { window_bits } => (Controller::Static, window_bits),
            WindowControllerSpec::Aimd {
                increase_per_ack,
                decrease_factor,
                floor_bits,
                initial_bits,
            } => (
                Controller::Aimd {
                    increase: increase_per_ack,
                    decrease: decrease_factor,
                    floor: floor_bits,
                },
                initial_bits.unwrap_or((10.0 * mss).max(floor_bits)),
            ),
        };
        let (tx_time, capacity_limited) = match spec.path.capacity_bps {
            Some(c) => (mss / c, true),
            None => (0.0, false),
        };
        Ok(Self {
            mss,
            fwd: spec.path.fwd_delay_s,
            rev: spec.path.rev_delay_s,
            tx_time,
            prop: (spec.path.fwd_delay_s - tx_time).max(0.0),
            capacity_limited,
            buffer: spec.path.buffer_pkts,
            source,
            controller,
            signal: spec.signal.process,
            mode: spec.signal.delivery_mode,
            rng: ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, "signal")),
            now: 0.0,
            stop_creation_at: f64::INFINITY,
            next_id: 0,
            window,
            last_decrease: f64::NEG_INFINITY,
            in_flight: 0,
            tx_count: 0,
            admitted: 0,
            acked: 0,
            packets: VecDeque::new(),
            base_id: 0,
            send_queue: VecDeque::new(),
            retx_queue: VecDeque::new(),
            link: VecDeque::new(),
            last_finish: f64::NEG_INFINITY,
            rx_events: VecDeque::new(),
            ack_events: VecDeque::new(),
            loss_events: VecDeque::new(),
            out_of_order: BTreeSet::new(),
            dropped: 0,
            marked: 0,
            paused: false,
            started: false,
        })
    }

    /// No packets are created after `t`; packets already created still drain.
    pub fn stop_creation_at(&mut self, t: f64) {
        self.stop_creation_at = t;
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn dropped_count(&self) -> u64 {
        self.dropped
    }

    pub fn marked_count(&self) -> u64 {
        self.marked
    }

    /// Packets created by the application so far.
    pub fn created_count(&self) -> u64 {
        self.next_id
    }

    fn creation_time(&self, id: u64) -> Option<f64> {
        let t = match &self.source {
            Source::ConstantRate { rate } => (id + 1) as f64 * self.mss / rate,
            Source::Greedy => return None,
            Source::Trace { process, total } => {
                let level = (id + 1) as f64 * self.mss;
                if level > *total * (1.0 + 1e-12) {
                    return None;
                }
                process.function().inverse_ge(level.min(*total))?
            }
        };
        (t <= self.stop_creation_at).then_some(t)
    }

    /// Processes events up to and including time `until`.
    pub fn run_until<O: Observer>(&mut self, until: f64, obs: &mut O) -> RunStatus {
        if !self.started {
            self.started = true;
            obs.on_window(0.0, self.window);
            self.try_send(obs);
        }
        self.paused = false;
        loop {
            let creation = self.creation_time(self.next_id);
            let candidates = [
                self.rx_events.front().map(|e| e.t),
                self.loss_events.front().map(|e| e.t),
                self.ack_events.front().map(|e| e.t),
                creation,
            ];
            let mut best: Option<(usize, f64)> = None;
            for (k, t) in candidates.iter().enumerate() {
                if let Some(t) = *t {
                    if best.is_none_or(|(_, bt)| t < bt) {
                        best = Some((k, t));
                    }
                }
            }
            let Some((kind, t)) = best else {
                return RunStatus::Idle;
            };
            if t > until {
                self.now = until;
                return RunStatus::ReachedTime;
            }
            self.now = t;
            match kind {
                0 => {
                    let e = self.rx_events.pop_front().expect("head exists");
                    self.on_receive(e, obs);
                }
                1 => {
                    let e = self.loss_events.pop_front().expect("head exists");
                    self.on_loss(e, obs);
                }
                2 => {
                    let e = self.ack_events.pop_front().expect("head exists");
                    self.on_ack(e, obs);
                }
                _ => {
                    let id = self.create_packet(t);
                    self.send_queue.push_back(id);
                }
            }
            self.try_send(obs);
            if self.paused {
                return RunStatus::Paused;
            }
        }
    }

    fn create_packet(&mut self, t1: f64) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.packets.push_back(InFlight {
            t1,
            t2: f64::NAN,
            t3: f64::NAN,
            signaled: false,
            retransmissions: 0,
        });
        id
    }

    fn packet(&mut self, id: u64) -> &mut InFlight {
        &mut self.packets[(id - self.base_id) as usize]
    }

    fn on_receive<O: Observer>(&mut self, e: RxEvent, obs: &mut O) {
        self.ack_events.push_back(RxEvent {
            t: e.t + self.rev,
            ..e
        });
        self.packet(e.id).t3 = e.t;
        if e.id != self.base_id {
            self.out_of_order.insert(e.id);
            return;
        }
        self.deliver_front(obs);
        while self.out_of_order.first() == Some(&self.base_id) {
            self.out_of_order.pop_first();
            self.deliver_front(obs);
        }
    }

    fn deliver_front<O: Observer>(&mut self, obs: &mut O) {
        let p = self.packets.pop_front().expect("delivered packet is tracked");
        let record = PacketRecord {
            id: self.base_id,
            t1: p.t1,
            t2: p.t2,
            t3: p.t3,
            t4: self.now,
            signaled: p.signaled,
            retransmissions: p.retransmissions,
        };
        self.base_id += 1;
        if !obs.on_delivery(&record) {
            self.paused = true;
        }
    }

    fn on_ack<O: Observer>(&mut self, e: RxEvent, obs: &mut O) {
        self.in_flight -= 1;
        self.acked += 1;
        if e.marked {
            self.congestion(e.sent, obs);
        } else if let Controller::Aimd { increase, .. } = self.controller {
            self.window += match increase {
                IncreaseRule::InverseWindow { gain } => gain * self.mss * self.mss / self.window,
                IncreaseRule::Fixed { mss_per_ack } => mss_per_ack * self.mss,
            };
            obs.on_window(self.now, self.window);
        }
    }

    fn on_loss<O: Observer>(&mut self, e: LossEvent, obs: &mut O) {
        self.in_flight -= 1;
        if e.signal {
            self.congestion(e.sent, obs);
        }
        self.retx_queue.push_back(e.id);
    }

    /// Multiplicative decrease, at most once per window of data: signals on
    /// packets sent before the last decrease are ignored.
    fn congestion<O: Observer>(&mut self, sent: f64, obs: &mut O) {
        if let Controller::Aimd {
            decrease, floor, ..
        } = self.controller
        {
            if sent > self.last_decrease {
                self.window = (self.window * decrease).max(floor);
                self.last_decrease = self.now;
                obs.on_window(self.now, self.window);
            }
        }
    }

    /// Admits packets while a whole packet still fits into the window, so that
    /// outstanding data never exceeds `W` after an admission.
    fn try_send<O: Observer>(&mut self, obs: &mut O) {
        while ((self.in_flight + 1) as f64) * self.mss <= self.window {
            let id = if let Some(id) = self.retx_queue.pop_front() {
                id
            } else if let Some(id) = self.send_queue.pop_front() {
                id
            } else if matches!(self.source, Source::Greedy) && self.now <= self.stop_creation_at {
                self.create_packet(self.now)
            } else {
                break;
            };
            self.transmit(id, obs);
        }
    }

    fn transmit<O: Observer>(&mut self, id: u64, obs: &mut O) {
        let now = self.now;
        self.in_flight += 1;
        self.tx_count += 1;
        let first = {
            let p = self.packet(id);
            if p.t2.is_nan() {
                p.t2 = now;
                true
            } else {
                p.retransmissions += 1;
                false
            }
        };
        if first {
            self.admitted += 1;
            obs.on_admission(&Admission {
                t: now,
                id,
                admitted_bits: self.admitted as f64 * self.mss,
                created_bits: self.next_id as f64 * self.mss,
                acked_bits: self.acked as f64 * self.mss,
                window_bits: self.window,
            });
        }

        let signal = match self.signal {
            SignalProcess::Bernoulli { p } => self.rng.random::<f64>() < p,
            SignalProcess::Periodic { every_n_packets } => self.tx_count.is_multiple_of(every_n_packets),
            SignalProcess::None | SignalProcess::BufferOverflow => false,
        };
        if signal {
            self.packet(id).signaled = true;
            if self.mode == DeliveryMode::DropWithRetransmit {
                self.drop_packet(id, true);
                return;
            }
        }

        let t3 = if self.capacity_limited {
            while self.link.front().is_some_and(|&f| f <= now) {
                self.link.pop_front();
            }
            if self.buffer.is_some_and(|b| self.link.len() as u64 >= b) {
                let overflow_signal = self.signal == SignalProcess::BufferOverflow;
                if overflow_signal {
                    self.packet(id).signaled = true;
                }
                obs.on_queue(now, self.link.len() as u64);
                self.drop_packet(id, overflow_signal);
                return;
            }
            let finish = now.max(self.last_finish) + self.tx_time;
            self.last_finish = finish;
            self.link.push_back(finish);
            obs.on_queue(now, self.link.len() as u64);
            finish + self.prop
        } else {
            now + self.fwd
        };
        if signal {
            self.marked += 1;
        }
        self.rx_events.push_back(RxEvent {
            t: t3,
            id,
            marked: signal,
            sent: now,
        });
    }

    fn drop_packet(&mut self, id: u64, signal: bool) {
        self.dropped += 1;
        self.loss_events.push_back(LossEvent {
            t: self.now + self.fwd + self.rev,
            id,
            signal,
            sent: self.now,
        });
    }
}
