package com.alibaba.nacos.client;

import java.io.File;
import java.io.IOException;

public class ConfigFileManager {

    private final String encode = "UTF-8";

    public String readFile(String path, String fileName) throws IOException {
        File file = openFile(path, fileName);
        if (file.exists()) {
            return IoUtils.toString(file.toURI().toURL().openStream(), encode);
        }
        return null;
    }

    private File openFile(String path, String fileName) {
        return new File(path, fileName);
    }
}
