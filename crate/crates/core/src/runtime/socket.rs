//! Socket transport: one thread per worker, a connected Unix stream pair
//! per worker pair, length-prefixed frames on the wire.
//!
//! Each worker thread spawns a reader per peer that decodes frames into a
//! single inbox channel, so the worker loop only ever blocks in one place.

use std::io::{BufWriter, Write};
use std::net::Shutdown;
use std::os::unix::net::UnixStream;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crate::partition::{Partition, WorkerId};
use crate::rdg::RdgPrime;

use super::message::{encode, read_frame, Message};
use super::worker::{Outbox, Worker};
use super::RuntimeError;

enum Incoming {
    Frame(Message),
    Closed(WorkerId),
    Failed(WorkerId, String),
}

struct Shared {
    halted: AtomicUsize,
    failed: AtomicBool,
}

struct Node {
    worker: Worker,
    peers: Vec<Option<UnixStream>>,
    inbox: Receiver<Incoming>,
}

impl Node {
    fn flush(&mut self, out: &mut Outbox) -> Result<(), RuntimeError> {
        for m in out.messages.drain(..) {
            let dst = m.dst as usize;
            let stream = self.peers[dst]
                .as_ref()
                .ok_or_else(|| RuntimeError::Protocol(format!("no stream to worker {dst}")))?;
            let mut w = BufWriter::new(stream);
            w.write_all(&encode(&m.body))
                .and_then(|_| w.flush())
                .map_err(|e| RuntimeError::Transport(format!("write to worker {dst}: {e}")))?;
        }
        out.events.clear();
        Ok(())
    }

    fn handle(&mut self, inc: Incoming, out: &mut Outbox) -> Result<(), RuntimeError> {
        match inc {
            Incoming::Frame(m) => self.worker.receive(m, out),
            Incoming::Closed(src) if self.worker.is_halted() => {
                let _ = src;
                Ok(())
            }
            Incoming::Closed(src) => Err(RuntimeError::Transport(format!(
                "worker {} lost its connection to worker {src}",
                self.worker.id()
            ))),
            Incoming::Failed(src, e) => Err(RuntimeError::Transport(format!(
                "worker {} reading from worker {src}: {e}",
                self.worker.id()
            ))),
        }
    }

    fn run(&mut self) -> Result<(), RuntimeError> {
        let mut out = Outbox::default();
        self.worker.start(&mut out)?;
        self.flush(&mut out)?;
        while !self.worker.is_halted() {
            while let Ok(inc) = self.inbox.try_recv() {
                self.handle(inc, &mut out)?;
                self.flush(&mut out)?;
            }
            if self.worker.is_halted() {
                break;
            }
            if self.worker.step(&mut out)? {
                self.flush(&mut out)?;
                continue;
            }
            let resumed = self.worker.poll(&mut out);
            if resumed {
                self.worker.resume(&mut out)?;
            }
            self.flush(&mut out)?;
            if resumed || self.worker.has_work() || self.peers.len() == 1 {
                continue;
            }
            let inc = self
                .inbox
                .recv()
                .map_err(|_| RuntimeError::Transport(format!("worker {} has no live peers", self.worker.id())))?;
            self.handle(inc, &mut out)?;
            self.flush(&mut out)?;
        }
        self.flush(&mut out)
    }

    fn shutdown(&self) {
        for s in self.peers.iter().flatten() {
            let _ = s.shutdown(Shutdown::Both);
        }
    }
}

fn spawn_reader(src: WorkerId, dst: WorkerId, stream: UnixStream, tx: Sender<Incoming>) {
    thread::Builder::new()
        .name(format!("dasc-read-{src}-{dst}"))
        .spawn(move || {
            let mut r = std::io::BufReader::new(stream);
            loop {
                match read_frame(&mut r) {
                    Ok(Some(body)) => {
                        if tx.send(Incoming::Frame(Message { src, dst, body })).is_err() {
                            return;
                        }
                    }
                    Ok(None) => {
                        let _ = tx.send(Incoming::Closed(src));
                        return;
                    }
                    Err(e) => {
                        let _ = tx.send(Incoming::Failed(src, e.to_string()));
                        return;
                    }
                }
            }
        })
        .expect("spawn reader thread");
}

/// Runs the search with one thread per worker over socket pairs and
/// returns the workers in their final state.
pub fn run_socket(
    g: Arc<RdgPrime>,
    partition: Arc<Partition>,
    max_models: Option<usize>,
) -> Result<Vec<Worker>, RuntimeError> {
    let k = partition.k();
    let mut peers: Vec<Vec<Option<UnixStream>>> = (0..k).map(|_| (0..k).map(|_| None).collect()).collect();
    for (i, j) in (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))) {
        let (a, b) = UnixStream::pair().map_err(|e| RuntimeError::Transport(e.to_string()))?;
        peers[i][j] = Some(a);
        peers[j][i] = Some(b);
    }
    let shared = Arc::new(Shared {
        halted: AtomicUsize::new(0),
        failed: AtomicBool::new(false),
    });
    let mut handles = Vec::new();
    for (id, streams) in peers.into_iter().enumerate() {
        let (tx, rx) = mpsc::channel();
        for (src, s) in streams.iter().enumerate() {
            if let Some(s) = s {
                let read = s.try_clone().map_err(|e| RuntimeError::Transport(e.to_string()))?;
                spawn_reader(src as WorkerId, id as WorkerId, read, tx.clone());
            }
        }
        drop(tx);
        let mut node = Node {
            worker: Worker::new(id as WorkerId, g.clone(), partition.clone(), max_models),
            peers: streams,
            inbox: rx,
        };
        let shared = shared.clone();
        let handle = thread::Builder::new()
            .name(format!("dasc-worker-{id}"))
            .spawn(move || {
                let result = node.run();
                match result {
                    Ok(()) => {
                        shared.halted.fetch_add(1, Ordering::SeqCst);
                        // keep streams open until every worker has seen Halt
                        while shared.halted.load(Ordering::SeqCst) < k && !shared.failed.load(Ordering::SeqCst) {
                            thread::sleep(Duration::from_millis(1));
                        }
                        node.shutdown();
                        Ok(node.worker)
                    }
                    Err(e) => {
                        shared.failed.store(true, Ordering::SeqCst);
                        node.shutdown();
                        Err(e)
                    }
                }
            })
            .map_err(|e| RuntimeError::Transport(e.to_string()))?;
        handles.push(handle);
    }
    let mut workers = Vec::with_capacity(k);
    let mut first_err = None;
    for h in handles {
        match h.join() {
            Ok(Ok(w)) => workers.push(w),
            Ok(Err(e)) => {
                first_err.get_or_insert(e);
            }
            Err(_) => {
                first_err.get_or_insert(RuntimeError::Transport("worker thread panicked".into()));
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(workers),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::round_robin;
    use crate::program::parse_program;

    #[test]
    fn socket_run_matches_sim() {
        let g = Arc::new(RdgPrime::build(
            &parse_program("a :- not b. b :- not a. c :- a. c :- b.").unwrap(),
        ));
        for k in 1..=3 {
            let p = Arc::new(round_robin(g.num_vertices(), k).unwrap());
            let workers = run_socket(g.clone(), p, None).unwrap();
            assert_eq!(workers[0].models().len(), 2);
        }
    }
}
