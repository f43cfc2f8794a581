namespace qtomo {}
