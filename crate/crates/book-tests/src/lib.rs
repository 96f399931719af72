// placeholder until the book chapters exist
