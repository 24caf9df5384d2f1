// SPDX-License-Identifier: Apache-2.0

//! The parallel evaluation engine.
//!
//! Three fixed-size task pools (LLM inference, C-simulation, synthesis) each
//! own a FIFO queue and a set of dedicated worker threads, so the per-stage
//! concurrency bound is literal. Evaluation drivers run on a separate set of
//! `n_jobs` threads, submit work to the pools, and block on the results.
//! Every enqueue, start, and finish is recorded in a trace.

use std::any::Any;
use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::{self, JoinHandle};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    /// Evaluation driver threads.
    pub n_jobs: usize,
    pub n_jobs_llm: usize,
    pub n_jobs_csim: usize,
    pub n_jobs_synth: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            n_jobs: 16,
            n_jobs_llm: 4,
            n_jobs_csim: 8,
            n_jobs_synth: 8,
        }
    }
}

impl PoolConfig {
    pub fn uniform(n: usize) -> Self {
        PoolConfig {
            n_jobs: n,
            n_jobs_llm: n,
            n_jobs_csim: n,
            n_jobs_synth: n,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        for (name, v) in [
            ("n_jobs", self.n_jobs),
            ("n_jobs_llm", self.n_jobs_llm),
            ("n_jobs_csim", self.n_jobs_csim),
            ("n_jobs_synth", self.n_jobs_synth),
        ] {
            if v == 0 {
                return Err(EngineError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn size(&self, pool: PoolKind) -> usize {
        match pool {
            PoolKind::Llm => self.n_jobs_llm,
            PoolKind::Csim => self.n_jobs_csim,
            PoolKind::Synth => self.n_jobs_synth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Llm,
    Csim,
    Synth,
}

impl PoolKind {
    pub const ALL: [PoolKind; 3] = [PoolKind::Llm, PoolKind::Csim, PoolKind::Synth];

    pub fn as_str(self) -> &'static str {
        match self {
            PoolKind::Llm => "llm",
            PoolKind::Csim => "csim",
            PoolKind::Synth => "synth",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Enqueued,
    Started,
    Finished,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Enqueued => "enqueued",
            EventKind::Started => "started",
            EventKind::Finished => "finished",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub pool: PoolKind,
    /// Unique within a trace: `<serial>:<label>`.
    pub task_id: String,
    pub event: EventKind,
    /// Seconds since the engine started, from a monotonic clock.
    pub t_seconds: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid pool configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("engine is shut down")]
    Shutdown,
    #[error("task panicked: {0}")]
    Panicked(String),
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".into()
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // Jobs run outside every lock, so poisoning can only come from a bug in
    // this module; the guarded data stays consistent either way.
    m.lock().unwrap_or_else(|p| p.into_inner())
}

struct TraceLog {
    start: Instant,
    events: Mutex<Vec<TraceEvent>>,
}

impl TraceLog {
    fn record(&self, pool: PoolKind, task_id: &str, event: EventKind) {
        let mut events = lock(&self.events);
        // Clock read under the lock: file order is time order.
        let t_seconds = self.start.elapsed().as_secs_f64();
        events.push(TraceEvent {
            pool,
            task_id: task_id.to_string(),
            event,
            t_seconds,
        });
    }
}

type Job = Box<dyn FnOnce() + Send>;

struct QueueState {
    jobs: VecDeque<(String, Job)>,
    closed: bool,
}

struct Pool {
    kind: PoolKind,
    queue: Mutex<QueueState>,
    ready: Condvar,
}

fn worker_loop(pool: Arc<Pool>, trace: Arc<TraceLog>) {
    loop {
        let (_, job) = {
            let mut q = lock(&pool.queue);
            loop {
                if let Some(next) = q.jobs.pop_front() {
                    // Recorded before the queue lock is released, so start
                    // order in the trace is dequeue order.
                    trace.record(pool.kind, &next.0, EventKind::Started);
                    break next;
                }
                if q.closed {
                    return;
                }
                q = pool.ready.wait(q).unwrap_or_else(|p| p.into_inner());
            }
        };
        job();
    }
}

/// Result of a submitted task.
#[must_use = "a task handle does nothing unless waited on"]
pub struct TaskHandle<T> {
    rx: mpsc::Receiver<Result<T, TaskError>>,
}

impl<T> TaskHandle<T> {
    /// Blocks until the task has run.
    pub fn wait(self) -> Result<T, TaskError> {
        self.rx.recv().unwrap_or(Err(TaskError::Shutdown))
    }
}

/// The three task pools plus their shared trace.
pub struct Engine {
    config: PoolConfig,
    pools: [Arc<Pool>; 3],
    trace: Arc<TraceLog>,
    workers: Mutex<Vec<JoinHandle<()>>>,
    serial: AtomicU64,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(config: PoolConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let trace = Arc::new(TraceLog {
            start: Instant::now(),
            events: Mutex::new(Vec::new()),
        });
        let pools = PoolKind::ALL.map(|kind| {
            Arc::new(Pool {
                kind,
                queue: Mutex::new(QueueState {
                    jobs: VecDeque::new(),
                    closed: false,
                }),
                ready: Condvar::new(),
            })
        });
        let mut workers = Vec::new();
        for pool in &pools {
            for i in 0..config.size(pool.kind) {
                let (p, t) = (pool.clone(), trace.clone());
                let handle = thread::Builder::new()
                    .name(format!("{}-{i}", pool.kind))
                    .spawn(move || worker_loop(p, t))
                    .expect("spawn pool worker");
                workers.push(handle);
            }
        }
        Ok(Engine {
            config,
            pools,
            trace,
            workers: Mutex::new(workers),
            serial: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> PoolConfig {
        self.config
    }

    /// Queues `task` on `pool`. A panic inside the task becomes
    /// [`TaskError::Panicked`]; the worker survives it.
    pub fn submit<T, F>(&self, pool: PoolKind, label: &str, task: F) -> TaskHandle<T>
    where
        T: Send + 'static,
        F: FnOnce() -> T + Send + 'static,
    {
        let (tx, rx) = mpsc::sync_channel(1);
        let p = &self.pools[pool.index()];
        let mut q = lock(&p.queue);
        if q.closed {
            let _ = tx.send(Err(TaskError::Shutdown));
            return TaskHandle { rx };
        }
        let task_id = format!("{}:{label}", self.serial.fetch_add(1, Ordering::Relaxed));
        let trace = self.trace.clone();
        let id = task_id.clone();
        let job: Job = Box::new(move || {
            let out = catch_unwind(AssertUnwindSafe(task)).map_err(|e| TaskError::Panicked(panic_message(e)));
            // Recorded before the result is delivered, so a waiter always
            // sees its own finish event in the trace.
            trace.record(pool, &id, EventKind::Finished);
            let _ = tx.send(out);
        });
        self.trace.record(pool, &task_id, EventKind::Enqueued);
        q.jobs.push_back((task_id, job));
        drop(q);
        p.ready.notify_one();
        TaskHandle { rx }
    }

    /// Runs every driver on one of `n_jobs` threads and returns their results
    /// in input order. A panicking driver yields an error for its own slot
    /// only.
    pub fn run_matrix<T, F>(&self, drivers: Vec<F>) -> Vec<Result<T, TaskError>>
    where
        T: Send,
        F: FnOnce(&Engine) -> T + Send,
    {
        let n = drivers.len();
        let slots: Vec<Mutex<Option<F>>> = drivers.into_iter().map(|d| Mutex::new(Some(d))).collect();
        let results: Vec<Mutex<Option<Result<T, TaskError>>>> = (0..n).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        thread::scope(|s| {
            for _ in 0..self.config.n_jobs.min(n) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= n {
                        break;
                    }
                    let Some(driver) = lock(&slots[i]).take() else { continue };
                    let out = catch_unwind(AssertUnwindSafe(|| driver(self)))
                        .map_err(|e| TaskError::Panicked(panic_message(e)));
                    *lock(&results[i]) = Some(out);
                });
            }
        });
        results
            .into_iter()
            .map(|m| {
                m.into_inner()
                    .unwrap_or_else(|p| p.into_inner())
                    .expect("every driver slot is filled")
            })
            .collect()
    }

    /// Stops accepting work, lets the pools drain their queues, and joins the
    /// workers. Idempotent.
    pub fn shutdown(&self) {
        for p in &self.pools {
            lock(&p.queue).closed = true;
            p.ready.notify_all();
        }
        let workers = std::mem::take(&mut *lock(&self.workers));
        for w in workers {
            let _ = w.join();
        }
    }

    pub fn trace(&self) -> Trace {
        Trace {
            config: self.config,
            events: lock(&self.trace.events).clone(),
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// A snapshot of the engine trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: PoolConfig,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    fn of(&self, pool: PoolKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.pool == pool)
    }

    pub fn count(&self, pool: PoolKind, event: EventKind) -> usize {
        self.of(pool).filter(|e| e.event == event).count()
    }

    /// Largest number of started-but-unfinished tasks at any point.
    pub fn max_concurrency(&self, pool: PoolKind) -> usize {
        let (mut cur, mut max) = (0usize, 0usize);
        for e in self.of(pool) {
            match e.event {
                EventKind::Started => {
                    cur += 1;
                    max = max.max(cur);
                }
                EventKind::Finished => cur = cur.saturating_sub(1),
                EventKind::Enqueued => {}
            }
        }
        max
    }

    /// Whether tasks of `pool` started in the order they were enqueued.
    pub fn is_fifo(&self, pool: PoolKind) -> bool {
        let order = |kind| self.of(pool).filter(move |e| e.event == kind).map(|e| &e.task_id);
        let enq: Vec<_> = order(EventKind::Enqueued).collect();
        let started: Vec<_> = order(EventKind::Started).collect();
        enq.iter().take(started.len()).eq(started.iter())
    }

    pub fn time_of(&self, task_id: &str, event: EventKind) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.task_id == task_id && e.event == event)
            .map(|e| e.t_seconds)
    }

    /// Task ids whose label (the part after `<serial>:`) equals `label`.
    pub fn ids_with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.events
            .iter()
            .filter(move |e| e.event == EventKind::Enqueued && e.task_id.split_once(':').map(|x| x.1) == Some(label))
            .map(|e| e.task_id.as_str())
    }

    /// CSV with `#` comment rows carrying the pool sizes, then one row per
    /// event in timestamp order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for pool in PoolKind::ALL {
            writeln!(out, "# pool_size {} {}", pool, self.config.size(pool))?;
        }
        writeln!(out, "# n_jobs {}", self.config.n_jobs)?;
        let mut events: Vec<&TraceEvent> = self.events.iter().collect();
        events.sort_by(|a, b| a.t_seconds.total_cmp(&b.t_seconds));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pool", "task_id", "event", "t_seconds"])?;
        for e in events {
            w.write_record([e.pool.as_str(), &e.task_id, e.event.as_str(), &format!("{:.6}", e.t_seconds)])?;
        }
        w.flush()
    }
}

/// Writes `trace` to `path` as CSV.
pub fn emit_trace(trace: &Trace, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    trace.write_csv(std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn engine(llm: usize, csim: usize, synth: usize) -> Engine {
        Engine::new(PoolConfig {
            n_jobs: 4,
            n_jobs_llm: llm,
            n_jobs_csim: csim,
            n_jobs_synth: synth,
        })
        .unwrap()
    }

    #[test]
    fn zero_sized_pool_is_rejected() {
        let cfg = PoolConfig {
            n_jobs_csim: 0,
            ..Default::default()
        };
        assert!(matches!(Engine::new(cfg), Err(EngineError::InvalidConfig(_))));
    }

    #[test]
    fn single_worker_is_fifo() {
        let e = engine(1, 1, 1);
        let log = Arc::new(Mutex::new(Vec::new()));
        let handles: Vec<_> = (0..3)
            .map(|i| {
                let log = log.clone();
                e.submit(PoolKind::Llm, &format!("t{i}"), move || log.lock().unwrap().push(i))
            })
            .collect();
        for h in handles {
            h.wait().unwrap();
        }
        assert_eq!(*log.lock().unwrap(), vec![0, 1, 2]);
        assert!(e.trace().is_fifo(PoolKind::Llm));
    }

    #[test]
    fn concurrency_is_bounded() {
        let e = engine(1, 2, 1);
        let handles: Vec<_> = (0..10)
            .map(|i| e.submit(PoolKind::Csim, &format!("s{i}"), || thread::sleep(Duration::from_millis(15))))
            .collect();
        handles.into_iter().for_each(|h| h.wait().unwrap());
        let t = e.trace();
        assert_eq!(t.max_concurrency(PoolKind::Csim), 2);
        assert_eq!(t.count(PoolKind::Csim, EventKind::Finished), 10);
        assert!(t.is_fifo(PoolKind::Csim));
    }

    #[test]
    fn panicking_task_is_isolated() {
        let e = engine(1, 1, 1);
        let bad = e.submit(PoolKind::Synth, "bad", || -> u32 { panic!("kaboom") });
        let good = e.submit(PoolKind::Synth, "good", || 7u32);
        assert_eq!(bad.wait(), Err(TaskError::Panicked("kaboom".into())));
        assert_eq!(good.wait(), Ok(7));
    }

    #[test]
    fn submit_after_shutdown_fails() {
        let e = engine(1, 1, 1);
        let queued = e.submit(PoolKind::Llm, "slow", || {
            thread::sleep(Duration::from_millis(20));
            1
        });
        e.shutdown();
        assert_eq!(queued.wait(), Ok(1), "queued work drains on shutdown");
        assert_eq!(e.submit(PoolKind::Llm, "late", || 2).wait(), Err(TaskError::Shutdown));
    }

    #[test]
    fn run_matrix_keeps_order_and_isolates_failures() {
        let e = engine(2, 2, 2);
        type Driver = Box<dyn FnOnce(&Engine) -> usize + Send>;
        let drivers: Vec<Driver> = (0..6)
            .map(|i| -> Box<dyn FnOnce(&Engine) -> usize + Send> {
                Box::new(move |eng: &Engine| {
                    if i == 3 {
                        panic!("driver {i} failed");
                    }
                    eng.submit(PoolKind::Llm, "x", move || i * 10).wait().unwrap()
                })
            })
            .collect();
        let out = e.run_matrix(drivers);
        assert_eq!(out.len(), 6);
        for (i, r) in out.iter().enumerate() {
            if i == 3 {
                assert!(matches!(r, Err(TaskError::Panicked(_))));
            } else {
                assert_eq!(r, &Ok(i * 10));
            }
        }
        let empty: Vec<fn(&Engine) -> ()> = Vec::new();
        assert!(e.run_matrix(empty).is_empty());
    }

    #[test]
    fn llm_work_is_not_stuck_behind_synthesis() {
        let e = engine(1, 1, 2);
        let synths: Vec<_> = (0..2)
            .map(|i| e.submit(PoolKind::Synth, &format!("syn{i}"), || thread::sleep(Duration::from_millis(200))))
            .collect();
        let llm = e.submit(PoolKind::Llm, "gen", || ());
        llm.wait().unwrap();
        synths.into_iter().for_each(|h| h.wait().unwrap());
        let t = e.trace();
        let gen = t.ids_with_label("gen").next().unwrap();
        let first_synth_done = t
            .events
            .iter()
            .filter(|ev| ev.pool == PoolKind::Synth && ev.event == EventKind::Finished)
            .map(|ev| ev.t_seconds)
            .fold(f64::INFINITY, f64::min);
        assert!(t.time_of(gen, EventKind::Finished).unwrap() < first_synth_done);
    }

    #[test]
    fn trace_csv_layout() {
        let e = engine(1, 1, 1);
        e.submit(PoolKind::Llm, "a", || ()).wait().unwrap();
        e.shutdown();
        let mut buf = Vec::new();
        e.trace().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# pool_size llm 1");
        assert_eq!(lines[4], "pool,task_id,event,t_seconds");
        assert_eq!(lines.len(), 8);
        assert!(lines[5].starts_with("llm,0:a,enqueued,"));
        assert!(lines[7].starts_with("llm,0:a,finished,"));

        let empty = Trace {
            config: PoolConfig::default(),
            events: vec![],
        };
        let mut buf = Vec::new();
        empty.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }
}
