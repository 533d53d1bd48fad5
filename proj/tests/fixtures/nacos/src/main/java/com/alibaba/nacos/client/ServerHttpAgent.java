package com.alibaba.nacos.client;

import com.alibaba.nacos.common.utils.StringUtils;

public class ServerHttpAgent implements HttpAgent {

    private static final String SERVER_ADDR_PROPERTY = "serverAddr";

    private static final String HTTPS_PREFIX = "https://";

    private boolean secure;

    public boolean useHttps() {
        String server = getProperty(SERVER_ADDR_PROPERTY, StringUtils.EMPTY);
        secure = server.startsWith(HTTPS_PREFIX);
        return secure;
    }

    @Override
    public String getName() {
        return "server-http-agent";
    }
}
