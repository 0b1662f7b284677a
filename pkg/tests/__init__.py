# Free Gibbs Transport tests package
