use crate::sim::{EndReason, IntervalRecord, Learner, LearnerStats, Telemetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    First,
    Rest,
}

/// Sends the first interval of every episode to one learner and all later
/// intervals to another. Each sub-learner numbers its intervals privately.
#[derive(Debug, Clone)]
pub struct TwoPhase<A1, A2> {
    first: A1,
    rest: A2,
    phase: Phase,
    new_episode: bool,
    count_first: usize,
    count_rest: usize,
}

impl<A1: Learner, A2: Learner> TwoPhase<A1, A2> {
    pub fn new(first: A1, rest: A2) -> Self {
        Self { first, rest, phase: Phase::First, new_episode: true, count_first: 0, count_rest: 0 }
    }

    pub fn first(&self) -> &A1 {
        &self.first
    }

    pub fn rest(&self) -> &A2 {
        &self.rest
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Intervals handled by `(first, rest)`.
    pub fn counts(&self) -> (usize, usize) {
        (self.count_first, self.count_rest)
    }
}

impl<A1: Learner, A2: Learner> Learner for TwoPhase<A1, A2> {
    fn on_interval_start(&mut self, _m: usize, s1: usize) {
        if self.new_episode {
            self.phase = Phase::First;
            self.count_first += 1;
            self.first.on_interval_start(self.count_first, s1);
        } else {
            self.phase = Phase::Rest;
            self.count_rest += 1;
            self.rest.on_interval_start(self.count_rest, s1);
        }
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        match self.phase {
            Phase::First => self.first.choose_action(h, s),
            Phase::Rest => self.rest.choose_action(h, s),
        }
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        match self.phase {
            Phase::First => self.first.observe(h, s, a, cost, next),
            Phase::Rest => self.rest.observe(h, s, a, cost, next),
        }
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        match self.phase {
            Phase::First => self.first.on_interval_end(record),
            Phase::Rest => self.rest.on_interval_end(record),
        }
        self.new_episode = record.end_reason == EndReason::GoalReached;
    }

    fn stats(&self) -> LearnerStats {
        self.first.stats() + self.rest.stats()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        let (mut t, phase) = match self.phase {
            Phase::First => (self.first.telemetry().unwrap_or_default(), 1.0),
            Phase::Rest => (self.rest.telemetry().unwrap_or_default(), 2.0),
        };
        t.fields.push(("phase", phase));
        Some(t)
    }
}
