"""Free Gibbs Transport - Renderer Package"""
