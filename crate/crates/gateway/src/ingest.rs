//! Framed TCP ingest.
//!
//! One thread per connection; each frame is answered with a 4-byte ack.
//! Malformed frames are rejected and counted but the connection stays up, so
//! a device with a flaky radio keeps its good frames flowing.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use airnet_proto::{Ack, MAX_FRAME_SIZE};

use crate::store::Gateway;

/// A running server; dropping it (or calling [`ServerHandle::stop`]) shuts
/// the accept loop down.
pub struct ServerHandle {
    pub addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

pub(crate) fn spawn_accept_loop<F>(
    listener: TcpListener,
    handler: F,
) -> std::io::Result<ServerHandle>
where
    F: Fn(TcpStream, Arc<AtomicBool>) + Send + Sync + 'static,
{
    let addr = listener.local_addr()?;
    listener.set_nonblocking(true)?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_accept = stop.clone();
    let handler = Arc::new(handler);
    let join = std::thread::spawn(move || {
        let mut workers = Vec::new();
        while !stop_accept.load(Ordering::SeqCst) {
            match listener.accept() {
                Ok((stream, _)) => {
                    let handler = handler.clone();
                    let stop = stop_accept.clone();
                    workers.push(std::thread::spawn(move || handler(stream, stop)));
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(_) => break,
            }
        }
        for w in workers {
            let _ = w.join();
        }
    });
    Ok(ServerHandle {
        addr,
        stop,
        join: Some(join),
    })
}

/// Binds the ingest listener and serves frames into `gateway`.
pub fn serve_ingest(gateway: Arc<Gateway>, addr: &str) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    spawn_accept_loop(listener, move |stream, stop| {
        handle_connection(&gateway, stream, &stop)
    })
}

fn handle_connection(gateway: &Gateway, mut stream: TcpStream, stop: &AtomicBool) {
    let _ = stream.set_nodelay(true);
    let _ = stream.set_read_timeout(Some(Duration::from_millis(200)));
    loop {
        if stop.load(Ordering::SeqCst) {
            return;
        }
        let mut len_bytes = [0u8; 4];
        match stream.read_exact(&mut len_bytes) {
            Ok(()) => {}
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => continue,
            Err(_) => return,
        }
        let len = u32::from_le_bytes(len_bytes) as usize;
        if len == 0 || len > MAX_FRAME_SIZE {
            // Unsynchronizable stream; drop the connection.
            return;
        }
        let mut frame = vec![0u8; len];
        if stream.read_exact(&mut frame).is_err() {
            return;
        }
        let ack = match gateway.handle_frame(&frame) {
            Ok(accepted) => Ack::ok(accepted),
            Err(_) => Ack::rejected(),
        };
        if stream.write_all(&ack.encode()).is_err() {
            return;
        }
    }
}
