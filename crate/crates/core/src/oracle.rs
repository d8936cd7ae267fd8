use crate::profile::QProfile;

/// Black-box access to an agent: Q values for its legal actions at a state.
pub trait QOracle<S: ?Sized> {
    type Error: std::error::Error + Send + Sync + 'static;

    fn evaluate(&mut self, state: &S) -> Result<QProfile, Self::Error>;
}

impl<S: ?Sized, O: QOracle<S> + ?Sized> QOracle<S> for &mut O {
    type Error = O::Error;

    fn evaluate(&mut self, state: &S) -> Result<QProfile, Self::Error> {
        (**self).evaluate(state)
    }
}

/// Adapts a closure into an oracle.
pub struct FnOracle<F>(pub F);

impl<S, F, E> QOracle<S> for FnOracle<F>
where
    S: ?Sized,
    F: FnMut(&S) -> Result<QProfile, E>,
    E: std::error::Error + Send + Sync + 'static,
{
    type Error = E;

    fn evaluate(&mut self, state: &S) -> Result<QProfile, E> {
        (self.0)(state)
    }
}
