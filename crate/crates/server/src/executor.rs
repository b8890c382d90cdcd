//! Fixed-size worker pool fed by a FIFO queue of run ids.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use chrono::Utc;
use crossbeam_channel::{unbounded, Receiver, Sender};
use wmt_core::coupler::{load_composition, run, Catalog, RunStatus as CoreStatus};

use crate::store::{RunStatus, Store, StoreError};

pub struct Executor {
    queue: Sender<String>,
    next_sequence: AtomicU64,
    workers: Vec<JoinHandle<()>>,
}

impl Executor {
    /// Recovers the queue from the store, then starts `workers` threads.
    /// Runs caught mid-execution by a crash are marked failed; queued runs
    /// are re-queued in submission order.
    pub fn start(
        store: Arc<Store>,
        catalog: Arc<Catalog>,
        workers: usize,
    ) -> Result<Executor, StoreError> {
        let (tx, rx) = unbounded::<String>();
        let mut max_sequence = 0;
        for record in store.runs()? {
            max_sequence = max_sequence.max(record.sequence);
            match record.status {
                RunStatus::Queued => tx.send(record.run_id).expect("receiver alive"),
                RunStatus::Running => {
                    store.update_run(&record.run_id, |r| {
                        r.status = RunStatus::Failed;
                        r.finished = Some(Utc::now());
                        r.message =
                            "interrupted: server stopped while the run was executing".to_string();
                    })?;
                }
                _ => {}
            }
        }
        let workers = (0..workers.max(1))
            .map(|k| {
                let rx = rx.clone();
                let store = Arc::clone(&store);
                let catalog = Arc::clone(&catalog);
                std::thread::Builder::new()
                    .name(format!("wmt-worker-{k}"))
                    .spawn(move || worker(rx, store, catalog))
                    .expect("spawn worker thread")
            })
            .collect();
        Ok(Executor {
            queue: tx,
            next_sequence: AtomicU64::new(max_sequence + 1),
            workers,
        })
    }

    pub fn next_sequence(&self) -> u64 {
        self.next_sequence.fetch_add(1, Ordering::SeqCst)
    }

    pub fn enqueue(&self, run_id: String) {
        // workers only exit once every sender is gone
        let _ = self.queue.send(run_id);
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }
}

fn worker(rx: Receiver<String>, store: Arc<Store>, catalog: Arc<Catalog>) {
    while let Ok(id) = rx.recv() {
        let _ = execute(&id, &store, &catalog);
    }
}

fn execute(id: &str, store: &Store, catalog: &Catalog) -> Result<(), StoreError> {
    let record = store.run(id)?;
    if record.status != RunStatus::Queued {
        return Ok(());
    }
    store.update_run(id, |r| {
        r.status = RunStatus::Running;
        r.started = Some(Utc::now());
    })?;

    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<_, String> {
        let document = store.run_document(id).map_err(|e| e.to_string())?;
        let text = String::from_utf8(document).map_err(|e| e.to_string())?;
        let composition = load_composition(&text, catalog).map_err(|e| e.to_string())?;
        let workdir = store.outputs_dir(id).map_err(|e| e.to_string())?;
        Ok(run(&composition, catalog, &workdir))
    }))
    .unwrap_or_else(|_| Err("run panicked".to_string()));

    store.update_run(id, |r| {
        r.finished = Some(Utc::now());
        match outcome {
            Ok(summary) => {
                r.t_final = Some(summary.t_final);
                r.outputs = summary.outputs;
                match (summary.status, summary.failure) {
                    (CoreStatus::Succeeded, _) => {
                        r.status = RunStatus::Succeeded;
                        r.message = format!("succeeded t_final={}", summary.t_final);
                    }
                    (CoreStatus::Failed, failure) => {
                        r.status = RunStatus::Failed;
                        r.message = failure.map(|f| f.to_string()).unwrap_or_default();
                    }
                }
            }
            Err(message) => {
                r.status = RunStatus::Failed;
                r.message = message;
            }
        }
    })?;
    Ok(())
}
