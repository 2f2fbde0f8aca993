use std::sync::{Arc, Mutex};
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender};

use super::{MediumEvent, SampleSink, SampleSource};
use crate::channel::ChannelError;
use crate::waveform::IntensitySamples;

/// Lossless in-order broadcast within one process. Cloning yields another
/// handle to the same medium.
#[derive(Debug, Clone, Default)]
pub struct InprocMedium {
    subscribers: Arc<Mutex<Vec<Sender<MediumEvent>>>>,
}

#[derive(Debug)]
pub struct InprocSubscription {
    rx: Receiver<MediumEvent>,
}

impl InprocMedium {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blocks published after this call are delivered to the subscription.
    pub fn subscribe(&self) -> InprocSubscription {
        let (tx, rx) = unbounded();
        self.subscribers.lock().unwrap().push(tx);
        InprocSubscription { rx }
    }

    pub fn subscriber_count(&self) -> usize {
        self.subscribers.lock().unwrap().len()
    }

    /// Tells every subscriber the stream is over.
    pub fn close(&self) {
        for s in self.subscribers.lock().unwrap().drain(..) {
            let _ = s.send(MediumEvent::End);
        }
    }
}

impl SampleSink for InprocMedium {
    fn publish(&mut self, block: &IntensitySamples) -> Result<(), ChannelError> {
        // dropped subscriptions are pruned here
        self.subscribers.lock().unwrap().retain(|s| s.send(MediumEvent::Samples(block.clone())).is_ok());
        Ok(())
    }
}

impl SampleSource for InprocSubscription {
    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<MediumEvent>, ChannelError> {
        match self.rx.recv_timeout(timeout) {
            Ok(ev) => Ok(Some(ev)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Ok(Some(MediumEvent::End)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_subscriber_sees_every_block_in_order() {
        let mut m = InprocMedium::new();
        let mut subs: Vec<_> = (0..3).map(|_| m.subscribe()).collect();
        for i in 0..5 {
            m.publish(&IntensitySamples::new(10, vec![i as f32; 3])).unwrap();
        }
        m.close();
        for s in &mut subs {
            for i in 0..5 {
                match s.recv_timeout(Duration::ZERO).unwrap() {
                    Some(MediumEvent::Samples(b)) => assert_eq!(b.samples, vec![i as f32; 3]),
                    other => panic!("{other:?}"),
                }
            }
            assert_eq!(s.recv_timeout(Duration::ZERO).unwrap(), Some(MediumEvent::End));
        }
    }

    #[test]
    fn dropped_subscribers_are_pruned() {
        let mut m = InprocMedium::new();
        let a = m.subscribe();
        let _b = m.subscribe();
        drop(a);
        m.publish(&IntensitySamples::new(1, vec![0.0])).unwrap();
        assert_eq!(m.subscriber_count(), 1);
    }
}
